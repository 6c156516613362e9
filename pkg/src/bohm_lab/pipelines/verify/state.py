"""State definitions for the verify pipeline.

Defines the data structures that flow through the verification workflow:
- PotentialSource: analytic family or a potential read from CSV
- VerifyState: Complete state during workflow execution
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

from bohm_lab.numerics.analytic import ReferenceFamily
from bohm_lab.numerics.eigensolver import BoundaryChoice, EigenSolution
from bohm_lab.numerics.fields import Field
from bohm_lab.numerics.qpotential import IdentityReport, PhysParams


class PotentialSource(str, Enum):
    """Where the classical potential comes from."""

    FAMILY = "family"
    CSV = "csv"


@dataclass
class VerifyState:
    """
    State that flows through the verify pipeline agents.

    Organized in stages:
    - Input: family or potential file, quantum number, tolerances
    - Build Potential: resolved family, window, boundary, exact energy
    - Solve State: eigenstate at the current spacing
    - Identity Check: V_Q + V - E_n residual report
    - Convergence Validation: two-grid energy change, refinement decision
    """

    # ===== Input Stage =====
    family: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)
    n: int = 0
    hbar: float = 1.0
    potential_path: Optional[str] = None
    h: Optional[float] = None
    residual_tolerance: Optional[float] = None  # default 1e-3 * max(1, |E_n|)
    energy_tolerance: float = 1e-4
    node_tol: float = 1e-6
    max_refinements: int = 2

    # ===== Build Potential Stage =====
    source: PotentialSource = PotentialSource.FAMILY
    reference: Optional[ReferenceFamily] = None
    phys: Optional[PhysParams] = None
    boundary: Optional[BoundaryChoice] = None
    window: Optional[Dict[str, Any]] = None  # kind, x_min, x_max
    fixed_potential: Optional[Field] = None  # CSV source only
    exact_energy: Optional[float] = None

    # ===== Solve State Stage =====
    potential: Optional[Field] = None
    solution: Optional[EigenSolution] = None
    energy: float = 0.0
    nodes: int = 0

    # ===== Identity Check Stage =====
    report: Optional[IdentityReport] = None
    tolerance_used: float = 0.0
    identity_passed: bool = False

    # ===== Convergence Validation Stage =====
    energy_change: Optional[float] = None
    convergence_factor: Optional[float] = None
    refinements: int = 0
    needs_refinement: bool = False
    converged: bool = False

    # ===== Validation Metrics =====
    validation_metrics: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Convert state to dictionary for JSON output."""
        return {
            "family": self.family,
            "params": self.params,
            "n": self.n,
            "hbar": self.hbar,
            "potential_path": self.potential_path,
            "h": self.h,
            "energy": self.energy,
            "exact_energy": self.exact_energy,
            "nodes": self.nodes,
            "report": self.report.model_dump() if self.report else None,
            "tolerance_used": self.tolerance_used,
            "identity_passed": self.identity_passed,
            "energy_change": self.energy_change,
            "convergence_factor": self.convergence_factor,
            "refinements": self.refinements,
            "converged": self.converged,
            "validation_metrics": self.validation_metrics,
        }
