"""Solve State Agent for the verify pipeline."""

import logging

from bohm_lab.numerics.eigensolver import solve_bound_state
from bohm_lab.pipelines.verify import tools
from bohm_lab.pipelines.verify.state import PotentialSource, VerifyState

logger = logging.getLogger(__name__)


def solve_state_agent(state: VerifyState) -> VerifyState:
    """
    Solve the n-th bound state at the current spacing.

    Args:
        state: VerifyState after build_potential (h may have been halved by
            convergence_validation)

    Returns:
        VerifyState with potential, solution, energy and nodes populated

    Raises:
        NoBoundStateError, DomainTooSmallError, SolverError: from the solver.
    """
    if state.source == PotentialSource.CSV:
        V = state.fixed_potential
    else:
        V = tools.potential_builder_for(state.reference, state.window)(state.h)
        state.boundary = tools.boundary_for(state.reference, V.grid)

    sol = solve_bound_state(V, state.n, state.phys, state.boundary)
    state.potential = V
    state.solution = sol
    state.energy = sol.energy
    state.nodes = sol.nodes
    logger.info(f"Solved n={sol.n}: E={sol.energy:.12g} at h={V.grid.h:.6g}")
    return state
