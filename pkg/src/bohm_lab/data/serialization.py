"""
CSV and JSON formats for fields, solutions, reports and trajectories.

All numbers are written with 17 significant digits; masked values and
padded trajectory cells are empty. Data files carry no timestamps, so equal
inputs give byte-identical files. Run metadata goes to a sidecar JSON.

Usage:
    from bohm_lab.data.serialization import write_field_csv, read_field_csv

    write_field_csv(R, "R.csv")
    R2 = read_field_csv("R.csv")
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from bohm_lab.errors import DomainError
from bohm_lab.numerics.bohm import Trajectory
from bohm_lab.numerics.eigensolver import EigenSolution
from bohm_lab.numerics.fields import Field, FieldMeaning, GridKind, MaskedField, make_uniform_grid
from bohm_lab.numerics.qpotential import IdentityReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
GRID_RTOL = 1e-9

_COORDINATE_KIND = {"x": GridKind.CARTESIAN, "r": GridKind.RADIAL}


class GridDescriptor(BaseModel):
    """JSON form of a Grid."""

    kind: str
    x_min: float
    x_max: float
    n: int
    h: float


class SolutionHeader(BaseModel):
    """JSON header of an EigenSolution; the amplitude goes to CSV."""

    n: int
    energy: float
    nodes: int
    geometry: str
    grid: GridDescriptor
    iterations: int
    energy_bracket_width: float


class Sidecar(BaseModel):
    """Run metadata written next to a data file."""

    model_config = ConfigDict(extra="forbid")

    command: str
    params: Dict[str, Any]
    grid: Optional[GridDescriptor] = None
    energy_offset: Optional[float] = None
    branch: Optional[str] = None
    tolerances: Dict[str, float] = {}
    library_version: str


# ===== TABLES =====


def write_table_csv(frame: pd.DataFrame, path: Path | str) -> Path:
    """Write a table with the fixed float format; NaN cells stay empty."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def field_frame(f: Field | MaskedField, value_name: str = "value") -> pd.DataFrame:
    """Two-column table (x|r, value); masked entries become NaN."""
    values = f.as_array() if isinstance(f, MaskedField) else f.values
    return pd.DataFrame({f.grid.coordinate_name: f.grid.points, value_name: values})


def write_field_csv(f: Field | MaskedField, path: Path | str, value_name: str = "value") -> Path:
    """Write a field as `x,value` (`r,value` for radial grids)."""
    return write_table_csv(field_frame(f, value_name), path)


def read_field_csv(
    path: Path | str,
    column: str = "value",
    meaning: FieldMeaning = FieldMeaning.AMPLITUDE,
) -> Field:
    """
    Read a field written by ``write_field_csv`` (or a figure table column).

    The first column gives the coordinate: `x` for cartesian, `r` for radial.
    Its values must form a uniform grid.

    Raises:
        FileNotFoundError: If the file does not exist.
        DomainError: If the table is malformed, non-uniform, or has empty values.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Field file not found: {path}")
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DomainError(f"Cannot parse {path} as CSV: {e}") from e

    if frame.shape[1] < 2:
        raise DomainError(f"{path}: expected a coordinate column and a value column")
    coord = str(frame.columns[0])
    if coord not in _COORDINATE_KIND:
        raise DomainError(f"{path}: first column must be 'x' or 'r', got {coord!r}")
    if column not in frame.columns:
        raise DomainError(f"{path}: no column {column!r}. Available: {list(frame.columns)}")

    try:
        x = frame[coord].to_numpy(dtype=float)
        values = frame[column].to_numpy(dtype=float)
    except ValueError as e:
        raise DomainError(f"{path}: non-numeric entries: {e}") from e
    if np.isnan(values).any() or np.isnan(x).any():
        raise DomainError(f"{path}: column {column!r} has empty or NaN entries")

    grid = make_uniform_grid(_COORDINATE_KIND[coord], float(x[0]), float(x[-1]), x.size)
    scale = max(1.0, float(np.max(np.abs(x))))
    if np.max(np.abs(grid.points - x)) > GRID_RTOL * scale:
        raise DomainError(f"{path}: coordinates are not a uniform grid")
    return Field(grid, values, meaning)


def trajectories_frame(trajectories: Sequence[Trajectory]) -> pd.DataFrame:
    """`t,x_1,...,x_m`; halted trajectories padded with NaN after their last time."""
    if not trajectories:
        raise DomainError("No trajectories to tabulate")
    longest = max(trajectories, key=lambda tr: tr.times.size)
    columns: Dict[str, np.ndarray] = {"t": longest.times}
    for i, tr in enumerate(trajectories, start=1):
        col = np.full(longest.times.size, np.nan)
        col[: tr.positions.size] = tr.positions
        columns[f"x_{i}"] = col
    return pd.DataFrame(columns)


def write_trajectories_csv(trajectories: Sequence[Trajectory], path: Path | str) -> Path:
    return write_table_csv(trajectories_frame(trajectories), path)


# ===== JSON =====


def grid_descriptor(f: Field | MaskedField) -> GridDescriptor:
    return GridDescriptor(**f.grid.to_dict())


def solution_header(sol: EigenSolution) -> SolutionHeader:
    return SolutionHeader(**sol.to_header())


def write_solution(sol: EigenSolution, csv_path: Path | str) -> List[Path]:
    """Amplitude CSV plus a JSON header with the same stem."""
    csv_path = Path(csv_path)
    written = [write_field_csv(sol.amplitude, csv_path)]
    header_path = csv_path.with_suffix(".json")
    header_path.write_text(solution_header(sol).model_dump_json(indent=2) + "\n")
    written.append(header_path)
    return written


def report_json(report: IdentityReport) -> str:
    """Flat JSON object with the five report keys."""
    return report.model_dump_json()


def write_sidecar(sidecar: Sidecar, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = sidecar.model_dump(exclude_none=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def sidecar_path(data_path: Path | str) -> Path:
    """`fig1.csv` -> `fig1.meta.json`."""
    data_path = Path(data_path)
    return data_path.with_name(data_path.stem + ".meta.json")
