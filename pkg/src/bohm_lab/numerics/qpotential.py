"""Forward map R -> V_Q, total potential, and the stationary identity check.

V_Q = -(hbar^2 / 2m) * laplacian(R) / R

For an energy eigenstate of V the identity V_Q + V - E_n = 0 holds pointwise;
``stationary_identity_residual`` measures how far a sampled state is from it.
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field as PydanticField, model_validator

from bohm_lab.config import DEFAULT_NODE_TOL
from bohm_lab.errors import DomainError
from bohm_lab.numerics.fields import Field, FieldMeaning, GridKind, MaskedField, laplacian

if TYPE_CHECKING:
    from bohm_lab.numerics.eigensolver import EigenSolution

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhysParams:
    """Particle mass and Planck constant."""

    mass: float
    hbar: float = 1.0

    def __post_init__(self) -> None:
        for name in ("mass", "hbar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be positive and finite, got {value}")

    @property
    def kinetic_scale(self) -> float:
        """hbar^2 / 2m, the prefactor of the kinetic operator."""
        return self.hbar * self.hbar / (2.0 * self.mass)


class IdentityReport(BaseModel):
    """Residual statistics of V_Q + V - E_n over the unmasked interior."""

    max_residual: float = PydanticField(ge=0.0)
    rms_residual: float = PydanticField(ge=0.0)
    masked_fraction: float = PydanticField(ge=0.0, le=1.0)
    energy_used: float
    node_tolerance: float = PydanticField(gt=0.0)

    @model_validator(mode="after")
    def _max_dominates_rms(self) -> "IdentityReport":
        if self.rms_residual > self.max_residual:
            raise ValueError(
                f"rms_residual {self.rms_residual} exceeds max_residual {self.max_residual}"
            )
        return self


# ===== FORWARD MAP =====


def quantum_potential(
    R: Field,
    p: PhysParams,
    node_tol: float = DEFAULT_NODE_TOL,
    even_symmetry: bool = False,
) -> MaskedField:
    """
    Quantum potential of an amplitude.

    Args:
        R: Amplitude field (cartesian or radial)
        p: Mass and hbar
        node_tol: Points with |R| < node_tol * max|R| are masked
        even_symmetry: Radial hint that R is even about r = 0 (keeps the origin)

    Returns:
        MaskedField of V_Q; endpoints and near-node points masked

    Raises:
        DomainError: If R is not an amplitude or vanishes identically.

    Example:
        >>> g = make_uniform_grid("cartesian", -5, 5, 1001)
        >>> R = sample(g, lambda x: np.exp(-x**2 / 4), FieldMeaning.AMPLITUDE)
        >>> round(quantum_potential(R, PhysParams(mass=1.0)).values[500], 4)
        0.25
    """
    if R.meaning != FieldMeaning.AMPLITUDE:
        raise DomainError(f"quantum_potential expects an amplitude, got {R.meaning.value}")
    if not (0.0 < node_tol < 1.0):
        raise DomainError(f"node_tol must lie in (0, 1), got {node_tol}")

    r = R.values
    peak = float(np.max(np.abs(r)))
    if peak == 0.0:
        raise DomainError("Amplitude vanishes identically; V_Q is undefined")

    lap = laplacian(R, even_symmetry=even_symmetry)
    mask = lap.mask & (np.abs(r) >= node_tol * peak)

    safe = np.where(mask, r, 1.0)
    values = np.where(mask, -p.kinetic_scale * lap.values / safe, 0.0)
    logger.debug(
        f"V_Q on {R.grid.describe()}: {int(np.count_nonzero(~mask))} masked points "
        f"(node_tol={node_tol:g})"
    )
    return MaskedField(Field(R.grid, values, FieldMeaning.POTENTIAL), mask)


def total_potential(V: Field, V_Q: MaskedField) -> MaskedField:
    """V_tot = V + V_Q with the mask of V_Q.

    Raises:
        DomainError: If the grids differ.
    """
    if not V.grid.matches(V_Q.grid):
        raise DomainError(f"Grid mismatch: {V.grid.describe()} vs {V_Q.grid.describe()}")
    values = np.where(V_Q.mask, V.values + V_Q.values, 0.0)
    return MaskedField(Field(V.grid, values, FieldMeaning.POTENTIAL), V_Q.mask)


def effective_potential(V_Q: MaskedField, energy: float) -> MaskedField:
    """Potential -V_Q - E seen by an amplitude that sources V_Q at energy E."""
    values = np.where(V_Q.mask, -V_Q.values - energy, 0.0)
    return MaskedField(Field(V_Q.grid, values, FieldMeaning.POTENTIAL), V_Q.mask)


# ===== STATIONARY IDENTITY =====


def identity_residual_field(
    V: Field,
    amplitude: Field,
    energy: float,
    p: PhysParams,
    node_tol: float = DEFAULT_NODE_TOL,
) -> MaskedField:
    """Pointwise V_Q + V - E on the unmasked points of V_Q."""
    if not V.grid.matches(amplitude.grid):
        raise DomainError(
            f"Grid mismatch: {V.grid.describe()} vs {amplitude.grid.describe()}"
        )
    V_Q = quantum_potential(amplitude, p, node_tol=node_tol)
    residual = np.where(V_Q.mask, V_Q.values + V.values - energy, 0.0)
    return MaskedField(Field(V.grid, residual, FieldMeaning.GENERIC), V_Q.mask)


def residual_report(
    residual: MaskedField,
    energy: float,
    node_tol: float,
    window: Optional[Tuple[float, float]] = None,
) -> IdentityReport:
    """Summarise a residual field, optionally over a sub-window of the grid."""
    grid = residual.grid
    in_window = np.ones(grid.n, dtype=bool)
    if window is not None:
        x = grid.points
        in_window = (x >= window[0]) & (x <= window[1])
        if not in_window.any():
            raise DomainError(f"Window {window} contains no point of {grid.describe()}")

    valid = residual.mask & in_window
    values = np.abs(residual.values[valid])
    if values.size:
        max_res = float(values.max())
        rms_res = min(float(np.sqrt(np.mean(values * values))), max_res)
    else:
        max_res = rms_res = 0.0
    masked_fraction = 1.0 - float(np.count_nonzero(valid)) / float(np.count_nonzero(in_window))

    return IdentityReport(
        max_residual=max_res,
        rms_residual=rms_res,
        masked_fraction=masked_fraction,
        energy_used=energy,
        node_tolerance=node_tol,
    )


def stationary_identity_residual(
    V: Field,
    sol: "EigenSolution",
    p: PhysParams,
    node_tol: float = DEFAULT_NODE_TOL,
    window: Optional[Tuple[float, float]] = None,
) -> IdentityReport:
    """
    Check V_Q[R_n] = -V + E_n for a solved (or sampled) eigenstate.

    The constant is the state's own energy, never a fitted offset.

    Args:
        V: Classical potential the state belongs to
        sol: Eigenstate; its amplitude must live on V's grid
        p: Mass and hbar used for V_Q
        node_tol: Relative node threshold for masking
        window: Optional (lo, hi) restricting the statistics

    Returns:
        IdentityReport over the unmasked interior points

    Raises:
        DomainError: On grid mismatch.
    """
    residual = identity_residual_field(V, sol.amplitude, sol.energy, p, node_tol)
    if sol.amplitude.grid.kind == GridKind.RADIAL and window is None:
        logger.debug("Radial identity check over the full grid; origin is masked")
    report = residual_report(residual, sol.energy, node_tol, window)
    logger.info(
        f"Identity residual n={sol.n}: max={report.max_residual:.3e} "
        f"rms={report.rms_residual:.3e} masked={report.masked_fraction:.3f}"
    )
    return report
