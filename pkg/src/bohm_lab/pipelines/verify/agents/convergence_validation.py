"""Convergence Validation Agent for the verify pipeline.

Two-grid energy check (h vs h/2) and the refinement decision.
"""

import logging
from typing import Dict

from bohm_lab.pipelines.verify import tools
from bohm_lab.pipelines.verify.state import PotentialSource, VerifyState

logger = logging.getLogger(__name__)


def convergence_validation_agent(state: VerifyState) -> VerifyState:
    """
    Validate grid convergence of the energy.

    Checks:
    1. |E(h) - E(h/2)| <= energy_tolerance
    2. Node count equals n
    3. Identity residual within tolerance
    4. Error reduction factor under halving (when E_n is known)

    Args:
        state: VerifyState with solution and report populated

    Returns:
        VerifyState with energy_change, convergence_factor, converged,
        needs_refinement and validation_metrics populated. When refinement
        is needed, h is halved here and refinements incremented.
    """
    if state.source == PotentialSource.CSV:
        # fixed grid: no refinement available
        state.energy_change = None
        state.convergence_factor = None
        state.converged = True
    else:
        change, factor = tools.two_grid_energy(
            state.reference,
            state.window,
            state.n,
            state.h,
            state.phys,
            state.boundary,
            state.exact_energy,
        )
        state.energy_change = change
        state.convergence_factor = factor
        state.converged = change <= state.energy_tolerance

    metrics: Dict[str, str] = {}
    metrics["energy"] = f"{state.energy:.12g}"
    if state.exact_energy is not None:
        metrics["energy_error"] = f"{abs(state.energy - state.exact_energy):.3e}"
    metrics["nodes"] = tools.pass_label(state.nodes == state.n)
    metrics["identity"] = tools.pass_label(state.identity_passed)
    metrics["max_residual"] = f"{state.report.max_residual:.3e}"
    if state.energy_change is not None:
        metrics["energy_change"] = f"{state.energy_change:.3e}"
    if state.convergence_factor is not None:
        metrics["convergence_factor"] = f"{state.convergence_factor:.3f}"
    metrics["converged"] = tools.pass_label(state.converged, soft=True)
    metrics["h"] = f"{state.h:.6g}"
    metrics["refinements"] = str(state.refinements)
    state.validation_metrics = metrics

    state.needs_refinement = tools.should_refine(
        state.energy_change, state.energy_tolerance, state.refinements, state.max_refinements
    )
    if state.needs_refinement:
        state.h = state.h / 2.0
        state.refinements += 1
        logger.info(
            f"Energy change {state.energy_change:.3e} > {state.energy_tolerance:.3e}: "
            f"refining to h={state.h:.6g} ({state.refinements}/{state.max_refinements})"
        )
    return state
