"""Bound states of -(hbar^2/2m) laplacian + V, and the amplitude ODE.

Two inverse maps from a target quantum potential V_Q back to an amplitude:
- Normalizable: solve the eigenproblem for the potential -V_Q. The n-th
  eigenvector is the amplitude whose quantum potential is V_Q + E_n.
- Initial value: integrate R'' = -(2m/hbar^2) V_Q R from a seed point, for
  targets (step, linear) whose amplitudes are not normalizable.

Discretization: 3-point stencil with Dirichlet ends. Radial problems act on
u = r R with u(0) = 0. Eigenvalues come from Sturm-sequence bisection on the
tridiagonal matrix, eigenvectors from inverse iteration.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal, solve_banded

from bohm_lab.errors import (
    DomainError,
    DomainTooSmallError,
    GrowthError,
    NoBoundStateError,
    SolverError,
)
from bohm_lab.numerics.fields import (
    Field,
    FieldMeaning,
    Grid,
    GridKind,
    grid_from_spacing,
    normalize,
)
from bohm_lab.numerics.qpotential import PhysParams

logger = logging.getLogger(__name__)

BRACKET_RTOL = 1e-12
DECAY_TOL = 1e-6
NODE_THRESHOLD = 1e-9
MAX_INVERSE_ITERATIONS = 50
INVERSE_ITERATION_TOL = 1e-12
GROWTH_LIMIT = 1e300


class BoundaryKind(str, Enum):
    """How the truncated domain is closed."""

    OPEN_LINE = "open_line"
    DIRICHLET_BOX = "dirichlet_box"
    RADIAL_REGULAR = "radial_regular"


@dataclass(frozen=True)
class BoundaryChoice:
    """
    Boundary treatment of a bound-state solve.

    - open_line: cartesian truncation of the infinite line. The state must
      decay before the edges and lie below the continuum edge min(V(ends)).
    - dirichlet_box: hard walls at the grid ends; no decay or continuum checks.
    - radial_regular: u(0) = 0 on a radial grid; the continuum edge is V(r_max)
      and decay is checked at the outer edge.
    """

    kind: BoundaryKind = BoundaryKind.OPEN_LINE

    @classmethod
    def for_grid(cls, grid: Grid) -> "BoundaryChoice":
        if grid.kind == GridKind.RADIAL:
            return cls(BoundaryKind.RADIAL_REGULAR)
        return cls(BoundaryKind.OPEN_LINE)

    def check(self, grid: Grid) -> None:
        radial_bc = self.kind == BoundaryKind.RADIAL_REGULAR
        if radial_bc != (grid.kind == GridKind.RADIAL):
            raise DomainError(
                f"Boundary {self.kind.value} is incompatible with a {grid.kind.value} grid"
            )


@dataclass(frozen=True)
class EigenSolution:
    """A solved bound state."""

    n: int
    energy: float
    amplitude: Field
    nodes: int
    geometry: GridKind
    iterations: int
    energy_bracket_width: float
    inverse_iterations: int = 0

    def to_header(self) -> Dict[str, Any]:
        """JSON header describing the state (the amplitude goes to CSV)."""
        return {
            "n": self.n,
            "energy": self.energy,
            "nodes": self.nodes,
            "geometry": self.geometry.value,
            "grid": self.amplitude.grid.to_dict(),
            "iterations": self.iterations,
            "energy_bracket_width": self.energy_bracket_width,
        }


@dataclass(frozen=True)
class EnergyConvergence:
    """Two-grid energy estimate at spacings h and h/2."""

    n: int
    h: float
    energy_coarse: float
    energy_fine: float
    exact: Optional[float] = None

    @property
    def delta(self) -> float:
        return abs(self.energy_fine - self.energy_coarse)

    @property
    def factor(self) -> Optional[float]:
        """|E(h) - E| / |E(h/2) - E| when the exact energy is known."""
        if self.exact is None:
            return None
        fine_err = abs(self.energy_fine - self.exact)
        if fine_err == 0.0:
            return None
        return abs(self.energy_coarse - self.exact) / fine_err


# ===== DISCRETE HAMILTONIAN =====


def hamiltonian_tridiagonal(V: Field, p: PhysParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    Diagonal and off-diagonal of H on the interior points.

    The end points carry the Dirichlet condition and are not unknowns; for
    radial grids the unknown is u = r R, so V[0] (the origin) is never read.

    Returns:
        (d, e): d has n-2 entries, e has n-3
    """
    h = V.grid.h
    kin = p.kinetic_scale / (h * h)
    d = 2.0 * kin + V.values[1:-1]
    e = np.full(d.size - 1, -kin)
    return d, e


def _sturm_count(d: List[float], e2: List[float], sigma: float) -> int:
    """Number of eigenvalues of the tridiagonal matrix strictly below sigma."""
    count = 0
    q = d[0] - sigma
    if q < 0.0:
        count += 1
    for i in range(1, len(d)):
        if q == 0.0:
            q = 1e-300
        q = d[i] - sigma - e2[i - 1] / q
        if q < 0.0:
            count += 1
    return count


def sturm_count(V: Field, p: PhysParams, energy: float) -> int:
    """
    Number of discrete eigenvalues of the grid Hamiltonian below ``energy``.

    Example:
        >>> g = make_uniform_grid("cartesian", 0.0, 1.0, 1001)
        >>> sturm_count(Field(g, np.zeros(1001)), PhysParams(mass=1.0), 20.0)
        2
    """
    d, e = hamiltonian_tridiagonal(V, p)
    return _sturm_count(d.tolist(), (e * e).tolist(), float(energy))


def _bisect_eigenvalue(d: np.ndarray, e: np.ndarray, n: int) -> Tuple[float, float, int]:
    """Bracket the (n+1)-th smallest eigenvalue to width <= 1e-12 max(1, |E|).

    LAPACK stebz supplies the starting estimate; the bracket is then
    re-established and tightened with our own Sturm count.
    """
    guess = float(
        eigh_tridiagonal(
            d, e, eigvals_only=True, select="i", select_range=(n, n), lapack_driver="stebz"
        )[0]
    )
    dl, e2 = d.tolist(), (e * e).tolist()

    delta = 1e-9 * max(1.0, abs(guess))
    lo, hi = guess - delta, guess + delta
    while _sturm_count(dl, e2, lo) > n:
        lo -= delta
        delta *= 2.0
    while _sturm_count(dl, e2, hi) < n + 1:
        hi += delta
        delta *= 2.0

    iterations = 0
    while hi - lo > BRACKET_RTOL * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _sturm_count(dl, e2, mid) > n:
            hi = mid
        else:
            lo = mid
        iterations += 1
    return 0.5 * (lo + hi), hi - lo, iterations


def _inverse_iteration(d: np.ndarray, e: np.ndarray, energy: float) -> Tuple[np.ndarray, int]:
    """Eigenvector of the tridiagonal matrix for an eigenvalue estimate."""
    size = d.size
    ab = np.zeros((3, size))
    ab[0, 1:] = e
    ab[2, :-1] = e

    # linspace start: not orthogonal to odd states of symmetric potentials
    start = np.linspace(1.0, 2.0, size)
    start /= np.linalg.norm(start)
    shift = energy
    for attempt in range(3):
        ab[1, :] = d - shift
        x = start
        try:
            for iteration in range(1, MAX_INVERSE_ITERATIONS + 1):
                y = solve_banded((1, 1), ab, x)
                if not np.all(np.isfinite(y)):
                    raise FloatingPointError("non-finite iterate")
                y /= np.linalg.norm(y)
                if np.dot(y, x) < 0.0:
                    y = -y
                update = float(np.linalg.norm(y - x))
                x = y
                if update < INVERSE_ITERATION_TOL:
                    return x, iteration
            if update < 1e-8:
                logger.warning(f"Inverse iteration stalled at update {update:.2e}; accepting")
                return x, MAX_INVERSE_ITERATIONS
            raise SolverError(
                f"Inverse iteration did not converge (last update {update:.2e})"
            )
        except (LinAlgError, FloatingPointError, ValueError):
            # exactly singular shift: nudge off the eigenvalue
            shift = energy + (attempt + 1) * 1e-10 * max(1.0, abs(energy))
    raise SolverError(f"Inverse iteration broke down at E = {energy}")


def _count_nodes(u: np.ndarray) -> int:
    """Interior sign changes, ignoring points below the noise floor."""
    peak = float(np.max(np.abs(u)))
    significant = u[np.abs(u) > NODE_THRESHOLD * peak]
    return int(np.count_nonzero(np.signbit(significant[1:]) != np.signbit(significant[:-1])))


def _orient(u: np.ndarray, n: int) -> np.ndarray:
    """Ground state non-negative; excited states start with a positive lobe."""
    if n == 0:
        return np.abs(u)
    peak = float(np.max(np.abs(u)))
    first = int(np.argmax(np.abs(u) > DECAY_TOL * peak))
    return u if u[first] > 0.0 else -u


def _continuum_edge(V: Field, bc: BoundaryChoice) -> Optional[float]:
    if bc.kind == BoundaryKind.OPEN_LINE:
        return float(min(V.values[0], V.values[-1]))
    if bc.kind == BoundaryKind.RADIAL_REGULAR:
        return float(V.values[-1])
    return None


def _amplitude_from_interior(grid: Grid, interior: np.ndarray) -> Field:
    u = np.zeros(grid.n)
    u[1:-1] = interior
    if grid.kind == GridKind.RADIAL:
        r = grid.points
        R = np.empty_like(u)
        R[1:] = u[1:] / r[1:]
        if grid.x_min == 0.0:
            # R(0) = u'(0), one-sided second-order difference
            R[0] = (4.0 * u[1] - u[2]) / (2.0 * grid.h)
        else:
            R[0] = 0.0
        u = R
    return normalize(Field(grid, u, FieldMeaning.AMPLITUDE))


# ===== BOUND STATES =====


def solve_bound_state(
    V: Field,
    n: int,
    p: PhysParams,
    bc: Optional[BoundaryChoice] = None,
) -> EigenSolution:
    """
    Solve for the n-th bound state of V.

    Args:
        V: Classical potential on a cartesian or radial grid
        n: Quantum number (0 = ground state)
        p: Mass and hbar
        bc: Boundary treatment; defaults to open_line / radial_regular by grid kind

    Returns:
        EigenSolution with a normalized amplitude and exactly n nodes

    Raises:
        DomainError: If n is negative or too large for the grid, or bc mismatches.
        NoBoundStateError: If E_n is not below the continuum edge.
        DomainTooSmallError: If the amplitude has not decayed at the edge.
        SolverError: If the node count differs from n.

    Example:
        >>> g = grid_from_spacing("cartesian", -12.0, 12.0, 0.01)
        >>> V = sample(g, lambda x: 0.125 * x**2, FieldMeaning.POTENTIAL)
        >>> round(solve_bound_state(V, 0, PhysParams(mass=1.0)).energy, 3)
        0.25
    """
    grid = V.grid
    bc = bc or BoundaryChoice.for_grid(grid)
    bc.check(grid)
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise DomainError(f"Quantum number must be a non-negative integer, got {n}")
    if n >= grid.n - 2:
        raise DomainError(f"Grid has {grid.n - 2} interior points; cannot resolve state n={n}")

    d, e = hamiltonian_tridiagonal(V, p)
    energy, width, iterations = _bisect_eigenvalue(d, e, int(n))
    logger.debug(f"E_{n} bracketed to width {width:.2e} after {iterations} bisections")

    edge = _continuum_edge(V, bc)
    if edge is not None and energy >= edge:
        raise NoBoundStateError(
            f"No bound state n={n}: E_n = {energy:.6g} is not below the continuum edge {edge:.6g}",
            n=int(n),
            continuum_edge=edge,
        )

    interior, inverse_iterations = _inverse_iteration(d, e, energy)
    nodes = _count_nodes(interior)
    if nodes != n:
        raise SolverError(
            f"State n={n} has {nodes} nodes on {grid.describe()}; refine the grid"
        )
    interior = _orient(interior, int(n))
    amplitude = _amplitude_from_interior(grid, interior)

    if bc.kind != BoundaryKind.DIRICHLET_BOX:
        values = np.abs(amplitude.values)
        peak = float(values.max())
        if bc.kind == BoundaryKind.OPEN_LINE:
            edge_amp = max(values[1], values[-2]) / peak
        else:
            edge_amp = values[-2] / peak
        if edge_amp > DECAY_TOL:
            raise DomainTooSmallError(
                f"State n={n} has not decayed at the grid edge "
                f"(|R(edge)|/max|R| = {edge_amp:.2e}); widen the domain",
                edge_amplitude=float(edge_amp),
            )

    logger.info(
        f"Solved n={n} on {grid.describe()}: E={energy:.12g} "
        f"({iterations} bisections, {inverse_iterations} inverse iterations)"
    )
    return EigenSolution(
        n=int(n),
        energy=energy,
        amplitude=amplitude,
        nodes=nodes,
        geometry=grid.kind,
        iterations=iterations,
        energy_bracket_width=width,
        inverse_iterations=inverse_iterations,
    )


def solve_spectrum(
    V: Field,
    n_states: int,
    p: PhysParams,
    bc: Optional[BoundaryChoice] = None,
) -> List[EigenSolution]:
    """The lowest ``n_states`` bound states of V, in increasing energy."""
    if n_states < 1:
        raise DomainError(f"n_states must be at least 1, got {n_states}")
    return [solve_bound_state(V, n, p, bc) for n in range(n_states)]


def inverse_from_quantum_potential(
    V_Q_target: Field,
    n: int,
    p: PhysParams,
    bc: Optional[BoundaryChoice] = None,
) -> EigenSolution:
    """
    Amplitude whose quantum potential is V_Q_target + E_n.

    Solves the bound-state problem for the classical potential -V_Q_target.
    An attractive (confining) -V_Q_target is required; the free target
    V_Q = 0 on the line has no normalizable source and raises
    NoBoundStateError.

    Example:
        >>> g = grid_from_spacing("cartesian", -12.0, 12.0, 0.01)
        >>> target = sample(g, lambda x: -0.125 * x**2, FieldMeaning.POTENTIAL)
        >>> sol = inverse_from_quantum_potential(target, 0, PhysParams(mass=1.0))
        >>> round(float(sol.amplitude.values.max()), 4)
        0.6316
    """
    V = Field(V_Q_target.grid, -V_Q_target.values, FieldMeaning.POTENTIAL)
    sol = solve_bound_state(V, n, p, bc)
    logger.info(f"Inverted V_Q target: source state n={n} raises V_Q by E_n={sol.energy:.10g}")
    return sol


def energy_convergence(
    build_potential: Callable[[float], Field],
    n: int,
    h: float,
    p: PhysParams,
    bc: Optional[BoundaryChoice] = None,
    exact: Optional[float] = None,
) -> EnergyConvergence:
    """
    Solve at spacing h and h/2 and compare.

    Args:
        build_potential: Maps a spacing to the potential sampled at that spacing
        n: Quantum number
        h: Coarse spacing
        p: Mass and hbar
        bc: Boundary treatment
        exact: Known energy, enables the convergence factor

    Returns:
        EnergyConvergence; ``factor`` is close to 4 for a second-order scheme
    """
    coarse = solve_bound_state(build_potential(h), n, p, bc)
    fine = solve_bound_state(build_potential(h / 2.0), n, p, bc)
    result = EnergyConvergence(
        n=n, h=h, energy_coarse=coarse.energy, energy_fine=fine.energy, exact=exact
    )
    logger.info(
        f"Two-grid energy n={n}: E(h)={coarse.energy:.12g} E(h/2)={fine.energy:.12g} "
        f"factor={result.factor}"
    )
    return result


def potential_builder(
    kind: GridKind | str, x_min: float, x_max: float, fn: Callable[[np.ndarray], np.ndarray]
) -> Callable[[float], Field]:
    """Spacing -> sampled potential on a fixed window (for energy_convergence)."""

    def build(h: float) -> Field:
        grid = grid_from_spacing(kind, x_min, x_max, h)
        return Field(grid, np.asarray(fn(grid.points), dtype=float), FieldMeaning.POTENTIAL)

    return build


# ===== INITIAL-VALUE INTEGRATION =====


def _sweep(
    values: np.ndarray,
    seed_v: float,
    coeff: float,
    h: float,
    x: np.ndarray,
    R0: float,
    dR0: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """RK4 for y = (R, R') along ``values`` (potential samples in sweep order).

    ``h`` is signed; ``x`` gives the abscissae in the same order. Half-step
    potentials are linear interpolations of neighbouring samples. Returns the
    R and R' samples in sweep order.
    """
    steps = values.size - 1
    out = np.empty(values.size)
    slope = np.empty(values.size)
    out[0], slope[0] = R0, dR0
    if steps == 0:
        return out, slope

    v_start = values[:-1].copy()
    v_start[0] = seed_v
    v_mid = 0.5 * (v_start + values[1:])
    v_end = values[1:]

    r, s = float(R0), float(dR0)
    for j in range(steps):
        k1r, k1s = s, -coeff * v_start[j] * r
        k2r, k2s = s + 0.5 * h * k1s, -coeff * v_mid[j] * (r + 0.5 * h * k1r)
        k3r, k3s = s + 0.5 * h * k2s, -coeff * v_mid[j] * (r + 0.5 * h * k2r)
        k4r, k4s = s + h * k3s, -coeff * v_end[j] * (r + h * k3r)
        r_next = r + h * (k1r + 2.0 * k2r + 2.0 * k3r + k4r) / 6.0
        s_next = s + h * (k1s + 2.0 * k2s + 2.0 * k3s + k4s) / 6.0
        if not (np.isfinite(r_next) and np.isfinite(s_next)) or abs(r_next) > GROWTH_LIMIT:
            raise GrowthError(
                f"Amplitude overflowed integrating past x = {x[j]:.6g}",
                last_valid_x=float(x[j]),
            )
        r, s = r_next, s_next
        out[j + 1], slope[j + 1] = r, s
    return out, slope


def _one_sided_seed(values: np.ndarray) -> float:
    """Potential at the seed extrapolated from the sweep's own side."""
    if values.size >= 3:
        return float(2.0 * values[1] - values[2])
    return float(values[0])


def _inward_sweep(
    values: np.ndarray, coeff: float, h: float, x: np.ndarray, R0: float, dR0: float
) -> np.ndarray:
    """
    Decaying solution of one side, integrated from the far edge toward x0.

    ``values`` and ``x`` run from the edge to x0 and ``h`` points toward x0.
    The edge seed is the evanescent log-derivative R'/R = sqrt(coeff (-V)),
    signed so R grows toward x0; the result is scaled to R0 at x0 (or to dR0
    when R0 = 0).
    """
    v_edge = float(values[0])
    if not v_edge < 0.0:
        raise DomainError(
            f"No evanescent region at x = {x[0]:.6g}: V_Q = {v_edge:.6g} must be negative "
            "to seed a decaying side"
        )
    growth = float(np.copysign(np.sqrt(-coeff * v_edge), h))
    R, dR = _sweep(values, v_edge, coeff, h, x, 1.0, growth)

    if R0 != 0.0:
        if R[-1] == 0.0:
            raise DomainError(f"Decaying solution vanishes at x0 = {x[-1]:.6g}; cannot match R0 = {R0}")
        scale = R0 / R[-1]
    else:
        scale = dR0 / dR[-1]
    logger.debug(
        f"Decaying side from x = {x[0]:.6g}: implied R'(x0) = {scale * dR[-1]:.9g} "
        f"(seed gave {dR0:.9g})"
    )
    return scale * R


def integrate_amplitude_ode(
    V_Q_target: Field,
    x0: float,
    R0: float,
    dR0: float,
    p: PhysParams,
    decaying_side: Optional[str] = None,
) -> Field:
    """
    Integrate R'' = -(2m/hbar^2) V_Q(x) R on both sides of x0.

    Fixed-step RK4 at the grid spacing. The seed potential of each sweep is
    extrapolated from that sweep's side, so a jump located exactly at x0 is
    respected. No normalizability is imposed: the result is returned as is.

    Outward sweeps into an evanescent region (V_Q < 0) pick up the growing
    solution from roundoff. Passing ``decaying_side`` ("left", "right" or
    "both") integrates that side inward from its far edge instead, starting on the
    decaying solution, and scales it to R0 at x0. That side is then fixed by
    R0 alone; dR0 is only used when R0 = 0.

    Args:
        V_Q_target: Target quantum potential (cartesian grid)
        x0: Seed location, a grid point
        R0: R(x0)
        dR0: R'(x0)
        p: Mass and hbar
        decaying_side: Side(s) integrated inward from the edge, or None

    Returns:
        Un-normalized amplitude Field on V_Q_target's grid

    Raises:
        DomainError: If x0 is not a grid point, the seed is (0, 0), or the far
            edge of ``decaying_side`` is not evanescent.
        GrowthError: If |R| exceeds 1e300 (reports the last valid x).

    Example:
        >>> g = grid_from_spacing("cartesian", -1.0, 1.0, 0.001)
        >>> step = sample(g, lambda x: np.where(x < 0, 0.0, 1.5), FieldMeaning.POTENTIAL)
        >>> R = integrate_amplitude_ode(step, 0.0, 1.0, 0.0, PhysParams(mass=1.0))
        >>> round(float(R.values[-1]), 8) == round(float(np.cos(np.sqrt(3.0))), 8)
        True
    """
    if R0 == 0.0 and dR0 == 0.0:
        raise DomainError("Seed (R0, dR0) = (0, 0) gives the trivial solution")
    if not (np.isfinite(R0) and np.isfinite(dR0)):
        raise DomainError(f"Seed must be finite, got ({R0}, {dR0})")
    if decaying_side not in (None, "left", "right", "both"):
        raise DomainError(
            f"decaying_side must be 'left', 'right', 'both' or None, got {decaying_side!r}"
        )

    grid = V_Q_target.grid
    i0 = grid.index_of(x0)
    h = grid.h
    x = grid.points
    v = V_Q_target.values
    coeff = 1.0 / p.kinetic_scale

    if decaying_side in ("right", "both") and i0 < grid.n - 1:
        right = _inward_sweep(v[i0:][::-1], coeff, -h, x[i0:][::-1], R0, dR0)[::-1]
    else:
        right, _ = _sweep(v[i0:], _one_sided_seed(v[i0:]), coeff, h, x[i0:], R0, dR0)

    if decaying_side in ("left", "both") and i0 > 0:
        left = _inward_sweep(v[: i0 + 1], coeff, h, x[: i0 + 1], R0, dR0)
    else:
        left_v = v[: i0 + 1][::-1]
        left, _ = _sweep(left_v, _one_sided_seed(left_v), coeff, -h, x[: i0 + 1][::-1], R0, dR0)
        left = left[::-1]

    values = np.empty(grid.n)
    values[i0:] = right
    values[: i0 + 1] = left
    logger.debug(
        f"Integrated amplitude ODE from x0={x0} over {grid.describe()} "
        f"(decaying side: {decaying_side or 'none'})"
    )
    return Field(grid, values, FieldMeaning.AMPLITUDE)
