"""Numerical core: grids and fields, special functions, the forward and
inverse quantum-potential maps, analytic references and Bohmian dynamics."""

from .analytic import (
    FamilyTag,
    ReferenceFamily,
    reference_amplitude,
    reference_classical_potential,
    reference_energy,
    reference_quantum_potential,
)
from .bohm import (
    ComplexField,
    FlowFields,
    PacketComponent,
    PacketSpec,
    PlaneWave,
    StationaryState,
    Trajectory,
    bohm_trajectories,
    compose,
    continuity_residual,
    final_position_histogram,
    flow_fields,
    gaussian_packet,
    newton_residual,
    polar_decompose,
    sample_initial_positions,
)
from .eigensolver import (
    BoundaryChoice,
    BoundaryKind,
    EigenSolution,
    energy_convergence,
    integrate_amplitude_ode,
    inverse_from_quantum_potential,
    solve_bound_state,
    solve_spectrum,
    sturm_count,
)
from .fields import (
    Field,
    FieldMeaning,
    Grid,
    GridKind,
    MaskedField,
    gradient,
    grid_from_spacing,
    integrate,
    laplacian,
    make_uniform_grid,
    normalize,
    restrict,
    sample,
)
from .qpotential import (
    IdentityReport,
    PhysParams,
    effective_potential,
    quantum_potential,
    stationary_identity_residual,
    total_potential,
)
from .specfun import AiryBranch, airy, airy_eval, hermite

__all__ = [
    "AiryBranch",
    "BoundaryChoice",
    "BoundaryKind",
    "ComplexField",
    "EigenSolution",
    "FamilyTag",
    "Field",
    "FieldMeaning",
    "FlowFields",
    "Grid",
    "GridKind",
    "IdentityReport",
    "MaskedField",
    "PacketComponent",
    "PacketSpec",
    "PhysParams",
    "PlaneWave",
    "ReferenceFamily",
    "StationaryState",
    "Trajectory",
    "airy",
    "airy_eval",
    "bohm_trajectories",
    "compose",
    "continuity_residual",
    "effective_potential",
    "energy_convergence",
    "final_position_histogram",
    "flow_fields",
    "gaussian_packet",
    "gradient",
    "grid_from_spacing",
    "hermite",
    "integrate",
    "integrate_amplitude_ode",
    "inverse_from_quantum_potential",
    "laplacian",
    "make_uniform_grid",
    "newton_residual",
    "normalize",
    "polar_decompose",
    "quantum_potential",
    "reference_amplitude",
    "reference_classical_potential",
    "reference_energy",
    "reference_quantum_potential",
    "restrict",
    "sample",
    "sample_initial_positions",
    "solve_bound_state",
    "solve_spectrum",
    "stationary_identity_residual",
    "sturm_count",
    "total_potential",
]
