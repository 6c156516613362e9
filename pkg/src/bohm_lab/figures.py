"""Figure tables: target quantum potential plus the amplitude that sources it.

- Figures 1-2 (harmonic, hydrogen_s): the amplitude is the ground state of
  -V_Q, solved on a padded domain and cropped to the plotted window. The
  sidecar records the offset E_0 (forward(R) = V_Q + E_0).
- Figures 3-4 (step, linear_airy): the amplitude is integrated from a seed
  at x = 0 and is not normalizable.

Grids and constants come from the fiducial catalogue (fiducials.yaml).
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from bohm_lab import __version__
from bohm_lab.config import FIDUCIALS_PATH, load_fiducials
from bohm_lab.data.serialization import (
    GridDescriptor,
    Sidecar,
    sidecar_path,
    write_sidecar,
    write_table_csv,
)
from bohm_lab.errors import DomainError
from bohm_lab.numerics.analytic import FamilyTag, ReferenceFamily, quantum_potential_field
from bohm_lab.numerics.eigensolver import (
    integrate_amplitude_ode,
    inverse_from_quantum_potential,
)
from bohm_lab.numerics.fields import (
    Field,
    FieldMeaning,
    GridKind,
    grid_from_spacing,
    make_uniform_grid,
    restrict,
)
from bohm_lab.numerics.qpotential import PhysParams, quantum_potential
from bohm_lab.numerics.specfun import AiryBranch, airy_eval

logger = logging.getLogger(__name__)

FIGURES = (1, 2, 3, 4)
# Padding beyond the window for the bound-state solve, in natural lengths
SOLVE_PAD = {FamilyTag.HARMONIC: 12.0, FamilyTag.HYDROGEN_S: 30.0}
ROUND_TRIP_TOL = {1: 1e-5, 2: 1e-5, 3: 1e-5, 4: 1e-4}


@dataclass
class FigureTable:
    """One figure's data table and its sidecar."""

    figure: int
    frame: pd.DataFrame
    sidecar: Sidecar

    @property
    def columns(self) -> List[str]:
        return list(self.frame.columns)


def _padded_grid(fam: ReferenceFamily, kind: GridKind, x_min: float, x_max: float, h: float):
    if fam.tag == FamilyTag.HARMONIC:
        pad = SOLVE_PAD[fam.tag] * fam.oscillator_length
        steps = math.ceil(pad / h)
        return grid_from_spacing(kind, x_min - steps * h, x_max + steps * h, h)
    # radial: extend only outward, to 30 Bohr radii
    outer = max(x_max, SOLVE_PAD[fam.tag] * fam.bohr_radius)
    steps = math.ceil((outer - x_max) / h)
    return grid_from_spacing(kind, x_min, x_max + steps * h, h)


def _source_from_inverse(fam: ReferenceFamily, window: Dict[str, Any]) -> tuple:
    kind = GridKind(window["kind"])
    h = float(window["h"])
    wide = _padded_grid(fam, kind, float(window["x_min"]), float(window["x_max"]), h)
    sol = inverse_from_quantum_potential(quantum_potential_field(fam, wide), 0, fam.p)

    lo = float(window["x_min"])
    if kind == GridKind.RADIAL and lo == 0.0:
        # V_Q = e^2/r diverges at the origin; the table starts at r = h
        lo = h
    amplitude = restrict(sol.amplitude, lo, float(window["x_max"]))
    return amplitude, sol.energy


def _source_from_ode(fam: ReferenceFamily, window: Dict[str, Any]) -> Field:
    grid = grid_from_spacing(
        window["kind"], float(window["x_min"]), float(window["x_max"]), float(window["h"])
    )
    target = quantum_potential_field(fam, grid)
    decaying_side = None
    if fam.tag == FamilyTag.STEP:
        R0, dR0 = 1.0, 0.0
    else:
        seed = airy_eval(fam.branch, 0.0)
        R0, dR0 = seed.value, -(fam.linear_k1 ** (1.0 / 3.0)) * seed.derivative
        # Ai decays where kappa x < 0; Bi grows there and is swept outward
        if fam.branch == AiryBranch.AI:
            decaying_side = "left" if fam.kappa > 0.0 else "right"
    return integrate_amplitude_ode(target, 0.0, R0, dR0, fam.p, decaying_side=decaying_side)


def build_figure(
    figure: int,
    branch: Optional[str] = None,
    hbar: float = 1.0,
    h: Optional[float] = None,
    fiducials_path: Optional[Path] = None,
) -> FigureTable:
    """
    Compute the data table of one figure.

    Args:
        figure: 1-4
        branch: Airy branch for figure 4 ("Ai" default, or "Bi")
        hbar: Planck constant (captions assume 1)
        h: Override the catalogue spacing
        fiducials_path: Alternative catalogue

    Returns:
        FigureTable with columns x,v_q,r (figure 2: r,v_q,r_amp)

    Raises:
        DomainError: If the figure number is out of range.
    """
    if figure not in FIGURES:
        raise DomainError(f"Figure must be one of {FIGURES}, got {figure}")
    fid = load_fiducials(figure, fiducials_path or FIDUCIALS_PATH)

    params = dict(fid["params"])
    params.setdefault("hbar", hbar)
    if figure == 4:
        params["branch"] = branch or fid.get("branch", "Ai")
    elif branch is not None:
        logger.warning(f"--branch only applies to figure 4; ignored for figure {figure}")
    fam = ReferenceFamily.from_params(fid["family"], params)

    window = dict(fid["grid"])
    if h is not None:
        window["h"] = h

    energy_offset = None
    if fid["source"] == "inverse":
        amplitude, energy_offset = _source_from_inverse(fam, window)
    else:
        amplitude = _source_from_ode(fam, window)

    coord = amplitude.grid.coordinate_name
    amp_name = "r_amp" if coord == "r" else "r"
    v_q = quantum_potential_field(fam, amplitude.grid).values
    frame = pd.DataFrame({coord: amplitude.grid.points, "v_q": v_q, amp_name: amplitude.values})

    sidecar = Sidecar(
        command="figures",
        params={"figure": figure, **fam.to_dict()},
        grid=GridDescriptor(**amplitude.grid.to_dict()),
        energy_offset=energy_offset,
        branch=fam.branch.value if fam.tag == FamilyTag.LINEAR_AIRY else None,
        tolerances={"round_trip": ROUND_TRIP_TOL[figure]},
        library_version=__version__,
    )
    logger.info(f"Figure {figure}: {len(frame)} rows on {amplitude.grid.describe()}")
    return FigureTable(figure=figure, frame=frame, sidecar=sidecar)


def write_figure(table: FigureTable, out_path: Path | str) -> List[Path]:
    """Write the CSV table and its `.meta.json` sidecar."""
    out_path = Path(out_path)
    return [write_table_csv(table.frame, out_path), write_sidecar(table.sidecar, sidecar_path(out_path))]


def round_trip_error(table: FigureTable, node_tol: float = 1e-6) -> float:
    """
    Max |forward(amplitude) - (v_q + E_0)| over the table.

    Excluded: masked points of the forward map, points next to a kink of the
    target (the step at x = 0, the Coulomb origin), and points whose 3-point
    stencil straddles a sign change of the amplitude. Next to a node at
    distance d the stencil error of R''/R grows like h^2 / d, so those points
    measure the grid, not the source.
    """
    frame = table.frame
    amp_name = table.columns[-1]
    grid_desc = table.sidecar.grid
    grid = make_uniform_grid(grid_desc.kind, grid_desc.x_min, grid_desc.x_max, grid_desc.n)
    p_mass = float(table.sidecar.params["mass"])
    p_hbar = float(table.sidecar.params["hbar"])

    R = Field(grid, frame[amp_name].to_numpy(), FieldMeaning.AMPLITUDE)
    forward = quantum_potential(R, PhysParams(mass=p_mass, hbar=p_hbar), node_tol=node_tol)

    target = frame["v_q"].to_numpy() + (table.sidecar.energy_offset or 0.0)
    smooth = np.ones(grid.n, dtype=bool)
    second = np.abs(target[2:] - 2.0 * target[1:-1] + target[:-2])
    smooth[1:-1] = second <= 1e-2 * max(1.0, float(np.max(np.abs(target))))

    amp = R.values
    straddle = np.zeros(grid.n, dtype=bool)
    straddle[1:-1] = (amp[:-2] * amp[1:-1] <= 0.0) | (amp[1:-1] * amp[2:] <= 0.0)

    valid = forward.mask & smooth & ~straddle
    if not valid.any():
        raise DomainError("No valid points to compare")
    return float(np.max(np.abs(forward.values[valid] - target[valid])))
