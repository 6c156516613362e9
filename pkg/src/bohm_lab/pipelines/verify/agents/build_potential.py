"""Build Potential Agent for the verify pipeline.

Resolves the classical potential: an analytic family on its default window,
or a fixed potential read from CSV.
"""

import logging

from bohm_lab.errors import DomainError
from bohm_lab.numerics.qpotential import PhysParams
from bohm_lab.pipelines.verify import tools
from bohm_lab.pipelines.verify.state import PotentialSource, VerifyState

logger = logging.getLogger(__name__)


def build_potential_agent(state: VerifyState) -> VerifyState:
    """
    Resolve family, window, boundary and exact energy.

    Args:
        state: VerifyState with family/params or potential_path populated

    Returns:
        VerifyState with reference (family runs), phys, window, h and
        exact_energy populated; fixed_potential for CSV runs

    Raises:
        DomainError: Neither or both sources given, or a bad parameter.
    """
    if (state.family is None) == (state.potential_path is None):
        raise DomainError("Give exactly one of a family or a potential file")
    if "mass" not in state.params:
        raise DomainError("A mass is required")

    if state.potential_path is not None:
        state.source = PotentialSource.CSV
        state.phys = PhysParams(mass=float(state.params["mass"]), hbar=state.hbar)
        V = tools.load_potential_csv(state.potential_path)
        state.fixed_potential = V
        state.window = {"kind": V.grid.kind.value, "x_min": V.grid.x_min, "x_max": V.grid.x_max}
        state.h = V.grid.h
        state.boundary = tools.boundary_for(None, V.grid)
        logger.info(f"Potential from {state.potential_path}: {V.grid.describe()}")
        return state

    fam = tools.resolve_family(state.family, state.params, state.hbar)
    state.source = PotentialSource.FAMILY
    state.reference = fam
    state.phys = fam.p
    window = tools.family_window(fam)
    if state.h is None:
        state.h = window["h"]
    state.window = window
    state.exact_energy = tools.exact_energy_or_none(fam, state.n)
    logger.info(
        f"Verify {fam.tag.value} n={state.n} on [{window['x_min']:.6g}, {window['x_max']:.6g}] "
        f"h={state.h:.6g}"
    )
    return state
