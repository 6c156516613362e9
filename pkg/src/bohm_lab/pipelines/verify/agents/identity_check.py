"""Identity Check Agent for the verify pipeline.

Checks V_Q[R_n] + V - E_n = 0 on the unmasked points of the solved state.
"""

from bohm_lab.numerics.qpotential import stationary_identity_residual
from bohm_lab.pipelines.verify import tools
from bohm_lab.pipelines.verify.state import VerifyState


def identity_check_agent(state: VerifyState) -> VerifyState:
    """
    Residual report of the stationary identity.

    Args:
        state: VerifyState with potential and solution populated

    Returns:
        VerifyState with report, tolerance_used and identity_passed populated
    """
    report = stationary_identity_residual(
        state.potential,
        state.solution,
        state.phys,
        node_tol=state.node_tol,
        window=tools.identity_window(state.reference),
    )
    state.report = report
    state.tolerance_used = tools.residual_tolerance(state.energy, state.residual_tolerance)
    state.identity_passed = report.max_residual <= state.tolerance_used
    return state
