"""Polar decomposition, flow fields, continuity and Bohmian trajectories.

Wave providers (analytic, free particle unless stated):
- PacketSpec: weighted sum of spreading Gaussian packets
- PlaneWave: A exp(i(kx - hbar k^2 t / 2m))
- StationaryState: R(x) exp(-iEt/hbar) for an eigenstate of a given V

Trajectories follow the guidance equation dx/dt = (hbar/m) Im(psi'/psi),
integrated with RK4. ``newton_residual`` checks the second-order form
m x'' = -d/dx (V + V_Q) along a computed path.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from bohm_lab.config import DEFAULT_NODE_TOL
from bohm_lab.errors import DomainError, InsufficientDataError
from bohm_lab.numerics.fields import Field, FieldMeaning, Grid, MaskedField, make_uniform_grid
from bohm_lab.numerics.qpotential import PhysParams

logger = logging.getLogger(__name__)

HALT_FRACTION = 1e-10
NEWTON_NODE_FRACTION = 1e-6
NEWTON_STENCIL = 1e-3
NORM_POINTS = 20001
NORM_HALF_WIDTH = 12.0  # in units of the spread width sigma_t


# ===== COMPLEX FIELDS =====


@dataclass(frozen=True)
class ComplexField:
    """Complex wavefunction samples on a grid at one time."""

    grid: Grid
    re: np.ndarray
    im: np.ndarray
    time: float = 0.0
    normalized: bool = False

    def __post_init__(self) -> None:
        re = np.array(self.re, dtype=float, copy=True)
        im = np.array(self.im, dtype=float, copy=True)
        if re.shape != (self.grid.n,) or im.shape != (self.grid.n,):
            raise DomainError("ComplexField arrays must match the grid length")
        if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
            raise DomainError("ComplexField values must be finite")
        re.setflags(write=False)
        im.setflags(write=False)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        if self.normalized:
            norm = self.norm_squared()
            if abs(norm - 1.0) > 1e-6:
                raise DomainError(f"normalized flag set but integral |psi|^2 = {norm:.9g}")

    @classmethod
    def from_complex(
        cls, grid: Grid, psi: np.ndarray, time: float = 0.0, normalized: bool = False
    ) -> "ComplexField":
        psi = np.asarray(psi, dtype=complex)
        return cls(grid, psi.real, psi.imag, time, normalized)

    @property
    def psi(self) -> np.ndarray:
        return self.re + 1j * self.im

    @property
    def modulus(self) -> np.ndarray:
        return np.hypot(self.re, self.im)

    def norm_squared(self) -> float:
        return float(trapezoid((self.re**2 + self.im**2) * self.grid.measure(), dx=self.grid.h))

    def phase_shifted(self, theta: float) -> "ComplexField":
        """Global phase e^{i theta} psi."""
        return ComplexField.from_complex(self.grid, np.exp(1j * theta) * self.psi, self.time)


@dataclass(frozen=True)
class FlowFields:
    """Density, probability current and velocity field of one snapshot.

    Where the velocity is unmasked, current = rho * velocity to rounding.
    """

    rho: Field
    current: MaskedField
    velocity: MaskedField


@dataclass(frozen=True)
class Trajectory:
    """Particle path sampled at a uniform step. A halted path stops early."""

    times: np.ndarray
    positions: np.ndarray
    initial_position: float
    halted: bool = False

    @property
    def final_position(self) -> float:
        return float(self.positions[-1])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0


# ===== WAVE PROVIDERS =====


class WaveProvider(Protocol):
    """Analytic wavefunction with exact first and second x-derivatives."""

    p: PhysParams

    def psi(self, x: np.ndarray, t: float) -> np.ndarray: ...

    def dpsi_dx(self, x: np.ndarray, t: float) -> np.ndarray: ...

    def d2psi_dx2(self, x: np.ndarray, t: float) -> np.ndarray: ...

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray: ...

    def peak_modulus(self, t: float) -> float: ...

    def relative_modulus(self, x: np.ndarray, t: float) -> np.ndarray: ...

    def derivative_ratios(self, x: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]: ...


def _guidance(p: PhysParams, psi: np.ndarray, dpsi: np.ndarray) -> np.ndarray:
    """(hbar/m) Im(psi* psi') / |psi|^2, zero where psi vanishes."""
    rho = np.abs(psi) ** 2
    safe = np.where(rho > 0.0, rho, 1.0)
    v = (p.hbar / p.mass) * np.imag(np.conj(psi) * dpsi) / safe
    return np.where(rho > 0.0, v, 0.0)


@dataclass(frozen=True)
class PacketComponent:
    """One Gaussian packet: center x_c, width sigma, momentum hbar*k, weight w."""

    center: float
    width: float
    momentum: float = 0.0
    weight: float = 1.0


@dataclass(frozen=True)
class PacketSpec:
    """
    Weighted superposition of free spreading Gaussian packets.

    Component j at time t, with alpha = 1 + i hbar t / (2 m sigma^2):
        (2 pi sigma^2)^(-1/4) alpha^(-1/2)
        * exp(-(x - x_c - hbar k t / m)^2 / (4 sigma^2 alpha) + i k (x - x_c) - i hbar k^2 t / 2m)
    The sum is renormalized numerically at every t.
    """

    components: Tuple[PacketComponent, ...]
    p: PhysParams = field(default_factory=lambda: PhysParams(mass=1.0))

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise DomainError("PacketSpec needs at least one component")
        for c in comps:
            if not (math.isfinite(c.width) and c.width > 0.0):
                raise DomainError(f"Packet width must be positive, got {c.width}")
        if all(c.weight == 0.0 for c in comps):
            raise DomainError("Packet weights are all zero")

    @classmethod
    def single(
        cls, center: float = 0.0, width: float = 1.0, k: float = 0.0, p: Optional[PhysParams] = None
    ) -> "PacketSpec":
        p = p or PhysParams(mass=1.0)
        return cls((PacketComponent(center, width, p.hbar * k),), p)

    @classmethod
    def two_gaussian(
        cls,
        separation: float = 4.0,
        width: float = 1.0,
        k: float = 0.0,
        p: Optional[PhysParams] = None,
    ) -> "PacketSpec":
        """Equal packets at +-separation*width; with k > 0 they move towards each other."""
        p = p or PhysParams(mass=1.0)
        d = separation * width
        return cls(
            (PacketComponent(-d, width, p.hbar * k), PacketComponent(d, width, -p.hbar * k)), p
        )

    def _wavenumber(self, c: PacketComponent) -> float:
        return c.momentum / self.p.hbar

    def _alpha(self, c: PacketComponent, t: float) -> complex:
        return 1.0 + 1j * self.p.hbar * t / (2.0 * self.p.mass * c.width**2)

    def _component(self, c: PacketComponent, x: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """Component value and its log-derivative d/dx log g."""
        k = self._wavenumber(c)
        alpha = self._alpha(c, t)
        shift = x - c.center - self.p.hbar * k * t / self.p.mass
        s2 = c.width**2
        exponent = (
            -(shift * shift) / (4.0 * s2 * alpha)
            + 1j * k * (x - c.center)
            - 1j * self.p.hbar * k * k * t / (2.0 * self.p.mass)
        )
        g = (2.0 * math.pi * s2) ** -0.25 / np.sqrt(alpha) * np.exp(exponent)
        dlog = -shift / (2.0 * s2 * alpha) + 1j * k
        return g, dlog

    def spread_width(self, c: PacketComponent, t: float) -> float:
        """sigma_t = sigma |alpha|."""
        return c.width * abs(self._alpha(c, t))

    def support(self, t: float) -> Tuple[float, float]:
        """Window holding all but a negligible tail of |psi|^2 at time t."""
        lo, hi = math.inf, -math.inf
        for c in self.components:
            mid = c.center + c.momentum * t / self.p.mass
            half = NORM_HALF_WIDTH * self.spread_width(c, t)
            lo, hi = min(lo, mid - half), max(hi, mid + half)
        return lo, hi

    def _raw(self, x: np.ndarray, t: float, order: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape, dtype=complex)
        for c in self.components:
            g, dlog = self._component(c, x, t)
            if order == 0:
                total += c.weight * g
            elif order == 1:
                total += c.weight * g * dlog
            else:
                curvature = -1.0 / (2.0 * c.width**2 * self._alpha(c, t))
                total += c.weight * g * (dlog * dlog + curvature)
        return total

    def norm_factor(self, t: float) -> float:
        return _packet_norm(self, float(t))

    def psi(self, x: np.ndarray, t: float) -> np.ndarray:
        return self.norm_factor(t) * self._raw(x, t, 0)

    def dpsi_dx(self, x: np.ndarray, t: float) -> np.ndarray:
        return self.norm_factor(t) * self._raw(x, t, 1)

    def d2psi_dx2(self, x: np.ndarray, t: float) -> np.ndarray:
        return self.norm_factor(t) * self._raw(x, t, 2)

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        return _guidance(self.p, self._raw(x, t, 0), self._raw(x, t, 1))

    def _raw_bound(self, t: float) -> float:
        return sum(
            abs(c.weight) * (2.0 * math.pi * c.width**2) ** -0.25 / math.sqrt(abs(self._alpha(c, t)))
            for c in self.components
        )

    def peak_modulus(self, t: float) -> float:
        """Upper bound of |psi| (sum of component peaks)."""
        return self.norm_factor(t) * self._raw_bound(t)

    def relative_modulus(self, x: np.ndarray, t: float) -> np.ndarray:
        """|psi| / peak_modulus, without computing the normalization."""
        return np.abs(self._raw(x, t, 0)) / self._raw_bound(t)

    def derivative_ratios(self, x: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """psi'/psi and psi''/psi (normalization cancels)."""
        raw = self._raw(x, t, 0)
        return self._raw(x, t, 1) / raw, self._raw(x, t, 2) / raw


@lru_cache(maxsize=4096)
def _packet_norm(spec: PacketSpec, t: float) -> float:
    lo, hi = spec.support(t)
    x = np.linspace(lo, hi, NORM_POINTS)
    density = np.abs(spec._raw(x, t, 0)) ** 2
    norm2 = float(trapezoid(density, x))
    if not (norm2 > 0.0 and math.isfinite(norm2)):
        raise DomainError(f"Packet superposition has norm^2 = {norm2} at t = {t}")
    return 1.0 / math.sqrt(norm2)


@dataclass(frozen=True)
class PlaneWave:
    """A exp(i(k x - hbar k^2 t / 2m)); not normalizable."""

    k: float
    p: PhysParams = field(default_factory=lambda: PhysParams(mass=1.0))
    amplitude: float = 1.0

    def psi(self, x: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        omega = self.p.hbar * self.k**2 / (2.0 * self.p.mass)
        return self.amplitude * np.exp(1j * (self.k * x - omega * t))

    def dpsi_dx(self, x: np.ndarray, t: float) -> np.ndarray:
        return 1j * self.k * self.psi(x, t)

    def d2psi_dx2(self, x: np.ndarray, t: float) -> np.ndarray:
        return -(self.k**2) * self.psi(x, t)

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.full(np.shape(x), self.p.hbar * self.k / self.p.mass)

    def peak_modulus(self, t: float) -> float:
        return abs(self.amplitude)

    def relative_modulus(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.ones(np.shape(x))

    def derivative_ratios(self, x: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
        shape = np.shape(x)
        return np.full(shape, 1j * self.k), np.full(shape, -(self.k**2) + 0j)


@dataclass(frozen=True)
class StationaryState:
    """
    R(x) exp(-i E t / hbar) for an eigenstate of the classical potential V.

    The second derivative uses the eigen-equation R'' = (2m/hbar^2)(V - E) R;
    the first derivative is a central difference of R with step ``dx``.
    """

    amplitude: Callable[[np.ndarray], np.ndarray]
    energy: float
    potential: Callable[[np.ndarray], np.ndarray]
    p: PhysParams = field(default_factory=lambda: PhysParams(mass=1.0))
    peak: float = 1.0
    dx: float = 1e-5

    def _phase(self, t: float) -> complex:
        return complex(np.exp(-1j * self.energy * t / self.p.hbar))

    def psi(self, x: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.asarray(self.amplitude(x), dtype=float) * self._phase(t)

    def dpsi_dx(self, x: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        dR = (np.asarray(self.amplitude(x + self.dx)) - np.asarray(self.amplitude(x - self.dx))) / (
            2.0 * self.dx
        )
        return dR * self._phase(t)

    def d2psi_dx2(self, x: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        scale = 1.0 / self.p.kinetic_scale
        return scale * (np.asarray(self.potential(x)) - self.energy) * self.psi(x, t)

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.zeros(np.shape(x))

    def peak_modulus(self, t: float) -> float:
        return self.peak

    def relative_modulus(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.abs(np.asarray(self.amplitude(np.asarray(x, dtype=float)), dtype=float)) / self.peak

    def derivative_ratios(self, x: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        R = np.asarray(self.amplitude(x), dtype=float)
        dR = (np.asarray(self.amplitude(x + self.dx)) - np.asarray(self.amplitude(x - self.dx))) / (
            2.0 * self.dx
        )
        curvature = (np.asarray(self.potential(x), dtype=float) - self.energy) / self.p.kinetic_scale
        return dR / R + 0j, curvature + 0j


def gaussian_packet(spec: PacketSpec, x: float | np.ndarray, t: float) -> complex | np.ndarray:
    """
    Normalized packet superposition at (x, t).

    Raises:
        DomainError: If t < 0.

    Example:
        >>> spec = PacketSpec.single(center=0.0, width=1.0)
        >>> round(abs(gaussian_packet(spec, 0.0, 0.0)), 6)
        0.631619
    """
    if t < 0.0:
        raise DomainError(f"Packets are evolved forward only; got t = {t}")
    values = spec.psi(np.asarray(x, dtype=float), t)
    if np.ndim(x) == 0:
        return complex(values)
    return values


def snapshot(provider: WaveProvider, grid: Grid, t: float) -> ComplexField:
    """Sample a provider on a grid at time t."""
    return ComplexField.from_complex(grid, provider.psi(grid.points, t), t)


# ===== POLAR FORM =====


def polar_decompose(
    psi: ComplexField, node_tol: float = DEFAULT_NODE_TOL
) -> Tuple[Field, MaskedField]:
    """
    Split psi into R = |psi| and an unwrapped phase S.

    The phase is unwrapped left to right over the unmasked points (jumps
    larger than pi folded by multiples of 2 pi); points with
    |psi| < node_tol * max|psi| are masked.

    Raises:
        DomainError: If psi vanishes identically.

    Example:
        >>> g = make_uniform_grid("cartesian", 0.0, 1.0, 101)
        >>> R, S = polar_decompose(ComplexField.from_complex(g, -np.ones(101)))
        >>> float(S.values[0]) == math.pi
        True
    """
    R = psi.modulus
    peak = float(R.max())
    if peak == 0.0:
        raise DomainError("Wavefunction vanishes identically; the phase is undefined")
    mask = R >= node_tol * peak

    S = np.zeros(psi.grid.n)
    S[mask] = np.unwrap(np.arctan2(psi.im[mask], psi.re[mask]))
    return (
        Field(psi.grid, R, FieldMeaning.AMPLITUDE),
        MaskedField(Field(psi.grid, S, FieldMeaning.GENERIC), mask),
    )


def compose(R: Field, S: MaskedField, time: float = 0.0) -> ComplexField:
    """R e^{iS}; masked phase entries contribute e^{i0}."""
    if not R.grid.matches(S.grid):
        raise DomainError(f"Grid mismatch: {R.grid.describe()} vs {S.grid.describe()}")
    phase = np.where(S.mask, S.values, 0.0)
    return ComplexField(R.grid, R.values * np.cos(phase), R.values * np.sin(phase), time)


def _central(values: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    return out


def _current(psi: ComplexField, p: PhysParams) -> np.ndarray:
    """(hbar/m) Im(psi* dpsi/dx) with central differences; ends left at 0."""
    h = psi.grid.h
    dre = _central(psi.re, h)
    dim = _central(psi.im, h)
    return (p.hbar / p.mass) * (psi.re * dim - psi.im * dre)


def flow_fields(
    psi: ComplexField, p: PhysParams, node_tol: float = DEFAULT_NODE_TOL
) -> FlowFields:
    """
    Density rho = |psi|^2, current J and velocity v = (hbar/m) dS/dx.

    v is the central difference of the unwrapped phase, masked at nodes and
    at the endpoints. Where v is defined J = rho v, so the two agree to
    rounding; at masked interior points J falls back to the central-difference
    current (hbar/m) Im(psi* psi').
    """
    grid = psi.grid
    rho = psi.re**2 + psi.im**2
    _, S = polar_decompose(psi, node_tol)

    interior = np.zeros(grid.n, dtype=bool)
    interior[1:-1] = True

    v_mask = interior.copy()
    v_mask[1:-1] &= S.mask[:-2] & S.mask[1:-1] & S.mask[2:]
    velocity = np.where(v_mask, (p.hbar / p.mass) * _central(S.values, grid.h), 0.0)
    current = np.where(v_mask, rho * velocity, _current(psi, p))

    return FlowFields(
        rho=Field(grid, rho, FieldMeaning.DENSITY),
        current=MaskedField.from_array(grid, current, interior),
        velocity=MaskedField.from_array(grid, velocity, v_mask),
    )


def continuity_residual(
    snapshots: Sequence[ComplexField],
    p: PhysParams,
    node_tol: float = DEFAULT_NODE_TOL,
) -> MaskedField:
    """
    d(rho)/dt + dJ/dx at the middle snapshot.

    Time derivative: central difference of the snapshots on either side of
    the middle one. Space derivative: central difference of the current.
    Two layers of endpoints and the near-node points are masked.

    Raises:
        DomainError: On fewer than 3 snapshots, mismatched grids or non-uniform dt.
    """
    if len(snapshots) < 3:
        raise DomainError(f"continuity_residual needs at least 3 snapshots, got {len(snapshots)}")
    grid = snapshots[0].grid
    for snap in snapshots[1:]:
        if not grid.matches(snap.grid):
            raise DomainError("Snapshots live on different grids")
    times = np.array([s.time for s in snapshots])
    steps = np.diff(times)
    if np.any(steps <= 0.0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise DomainError(f"Snapshots must be at uniform increasing times, got {times.tolist()}")

    mid = len(snapshots) // 2
    before, centre, after = snapshots[mid - 1], snapshots[mid], snapshots[mid + 1]
    dt = after.time - before.time

    rho_after = after.re**2 + after.im**2
    rho_before = before.re**2 + before.im**2
    drho_dt = (rho_after - rho_before) / dt

    dJ_dx = _central(_current(centre, p), grid.h)
    residual = drho_dt + dJ_dx

    mask = np.zeros(grid.n, dtype=bool)
    mask[2:-2] = True
    modulus = centre.modulus
    mask &= modulus >= node_tol * float(modulus.max())
    return MaskedField.from_array(grid, residual, mask)


# ===== TRAJECTORIES =====


def bohm_trajectories(
    provider: WaveProvider,
    initial_positions: Sequence[float],
    t_end: float,
    dt: float,
    t0: float = 0.0,
) -> List[Trajectory]:
    """
    Integrate dx/dt = v(x, t) with fixed-step RK4 for every initial position.

    A trajectory that reaches a point where |psi| < 1e-10 * peak|psi| is
    halted there; its Trajectory is shorter and flagged ``halted``.

    Args:
        provider: Analytic wavefunction (packets, plane wave, stationary state)
        initial_positions: Starting points
        t_end: Final time (absolute)
        dt: Step, > 0
        t0: Start time

    Returns:
        One Trajectory per initial position, in input order

    Raises:
        DomainError: If dt <= 0 or t_end - t0 < dt.
    """
    if not dt > 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    if t_end - t0 < dt:
        raise DomainError(f"t_end - t0 = {t_end - t0} is shorter than one step dt = {dt}")

    steps = int(round((t_end - t0) / dt))
    times = t0 + dt * np.arange(steps + 1)
    x0 = np.asarray(initial_positions, dtype=float)
    positions = np.full((steps + 1, x0.size), np.nan)
    positions[0] = x0
    last = np.full(x0.size, steps)
    active = np.ones(x0.size, dtype=bool)

    x = x0.copy()
    for j in range(steps):
        t = times[j]
        at_node = provider.relative_modulus(x, t) < HALT_FRACTION
        newly = active & at_node
        if newly.any():
            last[newly] = j
            active &= ~newly
            logger.info(f"Halted {int(newly.sum())} trajectories at a node, t={t:.6g}")
        if not active.any():
            break

        xa = x[active]
        k1 = provider.velocity(xa, t)
        k2 = provider.velocity(xa + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = provider.velocity(xa + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = provider.velocity(xa + dt * k3, t + dt)
        x_next = xa + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0

        finite = np.isfinite(x_next)
        idx = np.flatnonzero(active)
        if not finite.all():
            bad = idx[~finite]
            last[bad] = j
            active[bad] = False
            logger.warning(f"Non-finite velocity; halted {bad.size} trajectories at t={t:.6g}")
        x[idx[finite]] = x_next[finite]
        positions[j + 1, idx[finite]] = x_next[finite]

    out = []
    for i in range(x0.size):
        end = int(last[i])
        out.append(
            Trajectory(
                times=times[: end + 1].copy(),
                positions=positions[: end + 1, i].copy(),
                initial_position=float(x0[i]),
                halted=end < steps,
            )
        )
    logger.info(
        f"Integrated {x0.size} trajectories to t={t_end:g} (dt={dt:g}); "
        f"{sum(tr.halted for tr in out)} halted"
    )
    return out


def _quantum_potential_at(provider: WaveProvider, x: np.ndarray, t: float) -> np.ndarray:
    """V_Q from the exact derivatives: R''/R = Re(psi''/psi) + Im(psi'/psi)^2."""
    ratio1, ratio2 = provider.derivative_ratios(x, t)
    curvature = np.real(ratio2) + np.imag(ratio1) ** 2
    return -provider.p.kinetic_scale * curvature


def newton_residual(
    traj: Trajectory,
    provider: WaveProvider,
    p: Optional[PhysParams] = None,
    potential: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    h: float = NEWTON_STENCIL,
) -> float:
    """
    Max |m x'' + d/dx (V + V_Q)| along a trajectory.

    The acceleration is the second time difference of the recorded positions;
    the force is a central difference (step h) of V + V_Q, with V_Q built from
    the provider's amplitude. V defaults to 0 (free packets). Times whose
    stencil touches a near-node point (|psi| < 1e-6 peak) are excluded.

    Raises:
        DomainError: If the trajectory has fewer than 5 points.
        InsufficientDataError: If more than half of the interior times are excluded.
    """
    if traj.positions.size < 5:
        raise DomainError(f"newton_residual needs at least 5 points, got {traj.positions.size}")
    p = p or provider.p
    x = traj.positions
    t = traj.times
    dt = traj.dt
    accel = (x[2:] - 2.0 * x[1:-1] + x[:-2]) / (dt * dt)

    discrepancies = []
    excluded = 0
    for j in range(1, x.size - 1):
        xj, tj = x[j], t[j]
        stencil = np.array([xj - h, xj + h])
        if np.any(provider.relative_modulus(np.array([xj - h, xj, xj + h]), tj) < NEWTON_NODE_FRACTION):
            excluded += 1
            continue
        total = _quantum_potential_at(provider, stencil, tj)
        if potential is not None:
            total = total + np.asarray(potential(stencil), dtype=float)
        force = -(total[1] - total[0]) / (2.0 * h)
        discrepancies.append(abs(p.mass * accel[j - 1] - force))

    interior = x.size - 2
    if excluded > 0.5 * interior:
        raise InsufficientDataError(
            f"{excluded} of {interior} trajectory samples sit next to nodes"
        )
    return float(max(discrepancies)) if discrepancies else 0.0


# ===== ENSEMBLES =====


def sample_initial_positions(
    provider: WaveProvider,
    count: int,
    t: float = 0.0,
    window: Optional[Tuple[float, float]] = None,
    points: int = NORM_POINTS,
) -> np.ndarray:
    """
    Deterministic Born-distributed starting points.

    Places the i-th point at the (i + 1/2)/count quantile of |psi|^2.

    Raises:
        DomainError: If count < 1 or no window is available for the provider.
    """
    if count < 1:
        raise DomainError(f"count must be at least 1, got {count}")
    if window is None:
        support = getattr(provider, "support", None)
        if support is None:
            raise DomainError("Provider has no natural support; pass a window")
        window = support(t)
    x = np.linspace(window[0], window[1], points)
    density = np.abs(provider.psi(x, t)) ** 2
    cdf = cumulative_trapezoid(density, x, initial=0.0)
    if cdf[-1] <= 0.0:
        raise DomainError(f"|psi|^2 vanishes on the window {window}")
    cdf /= cdf[-1]
    quantiles = (np.arange(count) + 0.5) / count
    return np.interp(quantiles, cdf, x)


def final_position_histogram(
    trajectories: Sequence[Trajectory],
    bins: int = 50,
    value_range: Optional[Tuple[float, float]] = None,
    include_halted: bool = False,
) -> Tuple[np.ndarray, np.ndarray]:
    """Histogram (counts, edges) of final positions.

    Raises:
        InsufficientDataError: If no trajectory qualifies.
    """
    finals = [tr.final_position for tr in trajectories if include_halted or not tr.halted]
    if not finals:
        raise InsufficientDataError("No completed trajectories to histogram")
    counts, edges = np.histogram(np.asarray(finals), bins=bins, range=value_range)
    return counts, edges
