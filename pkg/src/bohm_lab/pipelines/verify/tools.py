"""Tools for verify pipeline agents.

Helper functions for:
- Resolving the classical potential (analytic family or CSV file)
- Boundary and window selection per family
- Identity-check tolerances and windows
- Two-grid energy convergence and refinement decisions
"""

from typing import Any, Callable, Dict, Optional, Tuple

from bohm_lab.data.serialization import read_field_csv
from bohm_lab.errors import DomainError
from bohm_lab.numerics.analytic import (
    FamilyTag,
    ReferenceFamily,
    classical_potential_field,
    default_window,
    reference_energy,
)
from bohm_lab.numerics.eigensolver import BoundaryChoice, BoundaryKind, energy_convergence
from bohm_lab.numerics.fields import Field, FieldMeaning, Grid, grid_from_spacing
from bohm_lab.numerics.qpotential import PhysParams

# Identity statistics for the Coulomb state skip the near-origin points,
# where the 3-point stencil meets the 1/r singularity.
HYDROGEN_WINDOW = (0.2, 15.0)  # in Bohr radii
DEFAULT_RESIDUAL_RTOL = 1e-3
BOUND_FAMILIES = (FamilyTag.HARMONIC, FamilyTag.HYDROGEN_S, FamilyTag.BOX)


# ===== POTENTIAL RESOLUTION =====


def resolve_family(family: str, params: Dict[str, Any], hbar: float) -> ReferenceFamily:
    """
    Build a bound-state family from CLI-style parameters.

    Raises:
        DomainError: Unknown family, missing constant, or a continuum family.

    Example:
        >>> fam = resolve_family("harmonic", {"mass": 1.0, "omega": 0.5}, 1.0)
        >>> fam.oscillator_length
        1.4142135623730951
    """
    fam = ReferenceFamily.from_params(family, params, hbar=hbar)
    if not fam.is_normalizable:
        raise DomainError(
            f"{fam.tag.value} has no bound states to verify; "
            f"use one of {[t.value for t in BOUND_FAMILIES]}"
        )
    return fam


def family_window(fam: ReferenceFamily) -> Dict[str, Any]:
    """Default solve window of a family as a plain dict (kind, x_min, x_max, h)."""
    kind, x_min, x_max, h = default_window(fam)
    return {"kind": kind.value, "x_min": x_min, "x_max": x_max, "h": h}


def boundary_for(fam: Optional[ReferenceFamily], grid: Grid) -> BoundaryChoice:
    """Hard walls for the box, the grid's natural choice otherwise."""
    if fam is not None and fam.tag == FamilyTag.BOX:
        return BoundaryChoice(BoundaryKind.DIRICHLET_BOX)
    return BoundaryChoice.for_grid(grid)


def exact_energy_or_none(fam: ReferenceFamily, n: int) -> Optional[float]:
    """Closed-form E_n when the family tabulates it for this n."""
    try:
        return reference_energy(fam, n)
    except DomainError:
        return None


def potential_builder_for(fam: ReferenceFamily, window: Dict[str, Any]) -> Callable[[float], Field]:
    """Spacing -> classical potential of the family on the fixed window."""

    def build(h: float) -> Field:
        grid = grid_from_spacing(window["kind"], window["x_min"], window["x_max"], h)
        return classical_potential_field(fam, grid)

    return build


def load_potential_csv(path: str) -> Field:
    """Classical potential from a `x,value` / `r,value` table."""
    return read_field_csv(path, column="value", meaning=FieldMeaning.POTENTIAL)


# ===== IDENTITY CHECK =====


def residual_tolerance(energy: float, tolerance: Optional[float]) -> float:
    """Caller tolerance, or 1e-3 * max(1, |E_n|)."""
    if tolerance is not None:
        if not tolerance > 0.0:
            raise DomainError(f"Residual tolerance must be positive, got {tolerance}")
        return tolerance
    return DEFAULT_RESIDUAL_RTOL * max(1.0, abs(energy))


def identity_window(fam: Optional[ReferenceFamily]) -> Optional[Tuple[float, float]]:
    if fam is not None and fam.tag == FamilyTag.HYDROGEN_S:
        a0 = fam.bohr_radius
        return HYDROGEN_WINDOW[0] * a0, HYDROGEN_WINDOW[1] * a0
    return None


# ===== CONVERGENCE =====


def two_grid_energy(
    fam: ReferenceFamily,
    window: Dict[str, Any],
    n: int,
    h: float,
    p: PhysParams,
    bc: BoundaryChoice,
    exact: Optional[float],
) -> Tuple[float, Optional[float]]:
    """
    |E(h) - E(h/2)| and, with a known energy, the error reduction factor.

    Returns:
        (energy_change, factor)
    """
    result = energy_convergence(potential_builder_for(fam, window), n, h, p, bc, exact)
    return result.delta, result.factor


def should_refine(
    energy_change: Optional[float],
    energy_tolerance: float,
    refinements: int,
    max_refinements: int,
) -> bool:
    """
    Refine when the two-grid change exceeds the tolerance and budget remains.

    Example:
        >>> should_refine(1e-3, 1e-4, 0, 2)
        True
        >>> should_refine(1e-3, 1e-4, 2, 2)
        False
    """
    if energy_change is None:
        return False
    return energy_change > energy_tolerance and refinements < max_refinements


def pass_label(ok: bool, soft: bool = False) -> str:
    if ok:
        return "PASS"
    return "WARN" if soft else "FAIL"
