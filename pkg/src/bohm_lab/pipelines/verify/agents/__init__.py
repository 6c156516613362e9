"""Agents for the verify pipeline.

Each agent is a node in the LangGraph workflow:
- build_potential_agent: Resolve family or CSV potential, window, exact energy
- solve_state_agent: Bound state at the current spacing
- identity_check_agent: V_Q + V - E_n residual report
- convergence_validation_agent: Two-grid energy check, refinement decision
"""

from .build_potential import build_potential_agent
from .convergence_validation import convergence_validation_agent
from .identity_check import identity_check_agent
from .solve_state import solve_state_agent

__all__ = [
    "build_potential_agent",
    "solve_state_agent",
    "identity_check_agent",
    "convergence_validation_agent",
]
