"""Verify pipeline: solve a bound state and check V_Q[R_n] = -V + E_n.

Workflow:
1. Build Potential: analytic family or CSV potential
2. Solve State: n-th bound state
3. Identity Check: residual report
4. Convergence Validation: two-grid energy change, loop with h halved

Output: IdentityReport plus energies, refinements and validation metrics.
"""

from .state import PotentialSource, VerifyState
from .workflow import build_verify_pipeline, run_verify_pipeline

__all__ = [
    "build_verify_pipeline",
    "run_verify_pipeline",
    "VerifyState",
    "PotentialSource",
]
