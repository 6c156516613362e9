"""LangGraph workflow for the verify pipeline.

Defines the orchestration of a stationary-identity verification:
1. Build Potential: family on its default window, or a CSV potential
2. Solve State: n-th bound state at spacing h
3. Identity Check: residual of V_Q + V - E_n
4. Convergence Validation: two-grid energy change

Refinement Loop:
- If |E(h) - E(h/2)| > energy_tolerance: halve h and solve again (at most
  max_refinements times)
- Otherwise: END
"""

from typing import Literal

from langgraph.graph import END, START, StateGraph

from .agents.build_potential import build_potential_agent
from .agents.convergence_validation import convergence_validation_agent
from .agents.identity_check import identity_check_agent
from .agents.solve_state import solve_state_agent
from .state import VerifyState


def build_verify_pipeline() -> StateGraph:
    """
    Build the verify pipeline as a LangGraph workflow.

    Workflow graph:
    ```
    START
      ↓
    BUILD_POTENTIAL (family or CSV potential)
      ↓
    SOLVE_STATE (bound state at h)
      ↓
    IDENTITY_CHECK (V_Q + V - E_n residual)
      ↓
    CONVERGENCE_VALIDATION (E(h) vs E(h/2))
      ↓
    ROUTE_REFINEMENT (needs_refinement?)
      ├─ YES → SOLVE_STATE (h halved)
      └─ NO → END
    ```

    Returns:
        Compiled LangGraph StateGraph ready for invocation.

    Example:
        >>> pipeline = build_verify_pipeline()
        >>> state = VerifyState(family="box", params={"mass": 1.0, "length": 1.0})
        >>> result = pipeline.invoke(state)
        >>> round(result["energy"], 3)
        4.935
    """
    workflow = StateGraph(VerifyState)

    # ===== Add Nodes =====

    workflow.add_node("build_potential", build_potential_agent)
    workflow.add_node("solve_state", solve_state_agent)
    workflow.add_node("identity_check", identity_check_agent)
    workflow.add_node("convergence_validation", convergence_validation_agent)

    # ===== Add Edges =====

    workflow.add_edge(START, "build_potential")
    workflow.add_edge("build_potential", "solve_state")
    workflow.add_edge("solve_state", "identity_check")
    workflow.add_edge("identity_check", "convergence_validation")

    def route_on_convergence(state: VerifyState) -> Literal["solve_state", "END"]:
        """Loop back while convergence_validation asked for a finer grid."""
        if state.needs_refinement:
            return "solve_state"
        return "END"

    workflow.add_conditional_edges(
        "convergence_validation",
        route_on_convergence,
        {"solve_state": "solve_state", "END": END},
    )

    # ===== Compile =====
    return workflow.compile()


def run_verify_pipeline(state: VerifyState) -> VerifyState:
    """
    Execute the verify pipeline.

    Args:
        state: Initial VerifyState with family/params (or potential_path) and n

    Returns:
        Final VerifyState with report, energies and validation metrics.

    Raises:
        BohmLabError: Propagated from the agents (domain or numerical failure).

    Example:
        >>> state = VerifyState(family="harmonic", params={"mass": 1.0, "omega": 0.5})
        >>> result = run_verify_pipeline(state)
        >>> result.identity_passed
        True
    """
    pipeline = build_verify_pipeline()
    # each refinement adds three steps
    limit = 10 + 3 * max(state.max_refinements, 0)
    result_dict = pipeline.invoke(state, config={"recursion_limit": limit})

    # LangGraph's invoke() returns a dict, not the state object
    if isinstance(result_dict, dict):
        for name in VerifyState.__dataclass_fields__:
            if name in result_dict:
                setattr(state, name, result_dict[name])

    return state
