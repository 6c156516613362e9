"""Configuration, fiducial catalogue and logging setup.

Default: hbar = 1, node tolerance 1e-6, outputs written to the working directory.
Environment overrides: BOHM_LAB_HBAR, BOHM_LAB_NODE_TOL, BOHM_LAB_OUTPUT_DIR.
"""

import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

DEFAULT_HBAR: float = 1.0
DEFAULT_NODE_TOL: float = 1e-6

# Base directories
PACKAGE_DIR = Path(__file__).parent
FIDUCIALS_PATH = PACKAGE_DIR / "fiducials.yaml"

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


@dataclass
class Config:
    """Application configuration."""

    hbar: float
    node_tol: float
    output_dir: Path
    fiducials_path: Path
    debug: bool = False

    def validate(self) -> bool:
        """Validate configuration.

        Raises:
            ValueError: If hbar is not strictly positive or node_tol is outside (0, 1).

        Returns:
            True if configuration is valid.
        """
        if not (self.hbar > 0.0) or self.hbar == float("inf"):
            raise ValueError(f"hbar must be positive and finite, got {self.hbar}")
        if not (0.0 < self.node_tol < 1.0):
            raise ValueError(f"node_tol must lie in (0, 1), got {self.node_tol}")
        return True


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError as e:
        raise ValueError(f"{name} must be a number, got {raw!r}") from e


def get_config(
    hbar: Optional[float] = None,
    node_tol: Optional[float] = None,
    debug: bool = False,
) -> Config:
    """Get application configuration.

    Args:
        hbar: Override BOHM_LAB_HBAR. None = use env var (defaults to 1).
        node_tol: Override BOHM_LAB_NODE_TOL. None = use env var (defaults to 1e-6).
        debug: Enable debug logging.

    Returns:
        Config instance with validated settings.

    Raises:
        ValueError: If a setting is out of range.

    Examples:
        >>> config = get_config()
        >>> config.hbar
        1.0
        >>> get_config(hbar=2.0).hbar
        2.0
    """
    # explicit arg > env var > default
    if hbar is None:
        hbar = _env_float("BOHM_LAB_HBAR", DEFAULT_HBAR)
    if node_tol is None:
        node_tol = _env_float("BOHM_LAB_NODE_TOL", DEFAULT_NODE_TOL)

    config = Config(
        hbar=hbar,
        node_tol=node_tol,
        output_dir=Path(os.getenv("BOHM_LAB_OUTPUT_DIR", ".")),
        fiducials_path=FIDUCIALS_PATH,
        debug=debug,
    )

    config.validate()
    return config


def _read_catalogue(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise FileNotFoundError(f"Fiducial catalogue not found: {path}")
    try:
        with open(path) as f:
            return yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ValueError(f"Invalid YAML in fiducial catalogue {path}: {e}") from e


def load_fiducials(figure: int, path: Path = FIDUCIALS_PATH) -> Dict[str, Any]:
    """Load the fiducial settings of one figure from the YAML catalogue.

    Args:
        figure: Figure number (1-4).
        path: Catalogue location (tests point this at fixtures).

    Returns:
        Dict with keys family, params, grid, source and optionally branch.

    Raises:
        FileNotFoundError: If the catalogue is missing.
        KeyError: If the figure is not in the catalogue.
        ValueError: If the catalogue is not valid YAML.

    Examples:
        >>> fid = load_fiducials(1)
        >>> fid["params"]["omega"]
        0.5
    """
    catalogue = _read_catalogue(path)
    key = f"figure_{figure}"
    if key not in catalogue:
        figures = sorted(k for k in catalogue if k.startswith("figure_"))
        raise KeyError(f"Figure {figure} not in catalogue. Available: {figures}")
    return catalogue[key]


def load_family_defaults(family: str, path: Path = FIDUCIALS_PATH) -> Dict[str, float]:
    """Default family constants (omega, charge, v0, kappa, length) from the catalogue.

    Returns an empty dict for a family without an entry.

    Examples:
        >>> load_family_defaults("harmonic")
        {'omega': 0.5}
    """
    defaults = _read_catalogue(path).get("family_defaults") or {}
    return {k: float(v) for k, v in (defaults.get(family) or {}).items()}


def configure_logging(debug: bool = False) -> None:
    """Send package logs to stderr; DEBUG when requested, WARNING otherwise."""
    logger = logging.getLogger("bohm_lab")
    # rebind to the current stderr on every call (CLI invocations may swap it)
    for old in list(logger.handlers):
        logger.removeHandler(old)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if debug else logging.WARNING)
