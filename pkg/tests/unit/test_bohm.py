"""Unit tests for polar decomposition, flow fields and Bohmian trajectories.

Validation criteria:
- Plane-wave paths move at hbar k / m; stationary-state paths are static
- Symmetric two-packet ensembles never cross x = 0 and end on the central bright fringe
- Continuity residual is O(h^2 + dt^2)
- Late-time fringes of the two-packet superposition sit at pi tau / 4
"""

import math
import unittest

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import minimize_scalar

from bohm_lab.errors import DomainError, InsufficientDataError
from bohm_lab.numerics.analytic import FamilyTag, ReferenceFamily, reference_amplitude
from bohm_lab.numerics.bohm import (
    ComplexField,
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
    snapshot,
)
from bohm_lab.numerics.fields import grid_from_spacing, make_uniform_grid
from bohm_lab.numerics.qpotential import PhysParams


def harmonic_state(n: int) -> StationaryState:
    fam = ReferenceFamily(FamilyTag.HARMONIC, PhysParams(mass=1.0), omega=0.5)
    return StationaryState(
        amplitude=lambda x: reference_amplitude(fam, n, x),
        energy=(n + 0.5) * 0.5,
        potential=lambda x: 0.125 * np.asarray(x) ** 2,
        p=fam.p,
        peak=float(np.max(np.abs(reference_amplitude(fam, n, np.linspace(-8, 8, 4001))))),
    )


class TestPolarForm(unittest.TestCase):
    """Test psi <-> (R, S)."""

    def setUp(self) -> None:
        self.grid = grid_from_spacing("cartesian", -8.0, 8.0, 0.01)
        self.spec = PacketSpec.single(center=0.5, width=1.0, k=1.5)

    def test_negative_real(self) -> None:
        """psi = -1 has phase pi."""
        g = make_uniform_grid("cartesian", 0.0, 1.0, 101)
        R, S = polar_decompose(ComplexField.from_complex(g, -np.ones(101)))
        self.assertEqual(float(S.values[0]), math.pi)
        np.testing.assert_array_equal(R.values, 1.0)

    def test_compose_inverts_decompose(self) -> None:
        """R e^{iS} reproduces psi."""
        psi = snapshot(self.spec, self.grid, 0.7)
        R, S = polar_decompose(psi)
        rebuilt = compose(R, S, psi.time)
        np.testing.assert_allclose(rebuilt.psi[S.mask], psi.psi[S.mask], atol=1e-12)

    def test_phase_unwrapped(self) -> None:
        """The phase of a moving packet has no 2 pi jumps."""
        _, S = polar_decompose(snapshot(self.spec, self.grid, 0.0))
        jumps = np.abs(np.diff(S.valid_values))
        self.assertLess(float(jumps.max()), math.pi)

    def test_zero_wavefunction(self) -> None:
        """psi = 0 has no phase."""
        g = make_uniform_grid("cartesian", 0.0, 1.0, 11)
        with self.assertRaises(DomainError):
            polar_decompose(ComplexField.from_complex(g, np.zeros(11)))

    def test_packet_value(self) -> None:
        """Unit-width packet peak (2 pi)^(-1/4)."""
        spec = PacketSpec.single(center=0.0, width=1.0)
        self.assertAlmostEqual(abs(gaussian_packet(spec, 0.0, 0.0)), (2.0 * math.pi) ** -0.25, places=10)
        with self.assertRaises(DomainError):
            gaussian_packet(spec, 0.0, -1.0)

    def test_packet_normalized(self) -> None:
        """The superposition is renormalized at each time."""
        spec = PacketSpec.two_gaussian(separation=1.0, width=1.0)
        g = grid_from_spacing("cartesian", -20.0, 20.0, 0.01)
        for t in (0.0, 3.0):
            self.assertAlmostEqual(snapshot(spec, g, t).norm_squared(), 1.0, places=8)


class TestFlowFields(unittest.TestCase):
    """Test density, current and velocity."""

    def test_plane_wave(self) -> None:
        """v = k and J = rho v = k on the interior."""
        g = grid_from_spacing("cartesian", -5.0, 5.0, 0.01)
        flow = flow_fields(snapshot(PlaneWave(k=1.0), g, 0.0), PhysParams(mass=1.0))
        np.testing.assert_allclose(flow.velocity.valid_values, 1.0, atol=1e-10)
        np.testing.assert_allclose(flow.current.valid_values, 1.0, atol=1e-10)
        np.testing.assert_allclose(flow.rho.values, 1.0)
        self.assertFalse(flow.current.mask[0])

    def test_symmetric_current_vanishes_at_origin(self) -> None:
        """Two equal packets at rest: J(0) = 0."""
        g = grid_from_spacing("cartesian", -10.0, 10.0, 0.01)
        spec = PacketSpec.two_gaussian(separation=2.0, width=1.0)
        flow = flow_fields(snapshot(spec, g, 1.5), spec.p)
        self.assertLess(abs(flow.current.values[g.index_of(0.0)]), 1e-12)

    def test_current_is_density_times_velocity(self) -> None:
        """J = rho v to rounding wherever v is defined."""
        g = grid_from_spacing("cartesian", -12.0, 12.0, 0.01)
        for spec, t in (
            (PacketSpec.single(center=0.5, width=1.0, k=1.5), 0.7),
            (PacketSpec.two_gaussian(separation=2.0, width=1.0, k=1.0), 2.0),
        ):
            flow = flow_fields(snapshot(spec, g, t), spec.p)
            mask = flow.velocity.mask
            rho_v = flow.rho.values[mask] * flow.velocity.values[mask]
            np.testing.assert_allclose(flow.current.values[mask], rho_v, rtol=1e-10, atol=0.0)

    def test_global_phase_invariance(self) -> None:
        """A global phase leaves J and v unchanged."""
        g = grid_from_spacing("cartesian", -8.0, 8.0, 0.01)
        spec = PacketSpec.single(center=0.0, width=1.0, k=2.0)
        psi = snapshot(spec, g, 0.5)
        base = flow_fields(psi, spec.p)
        shifted = flow_fields(psi.phase_shifted(0.7), spec.p)
        np.testing.assert_allclose(shifted.current.values, base.current.values, atol=1e-12)
        np.testing.assert_allclose(shifted.velocity.valid_values, base.velocity.valid_values, atol=1e-10)


class TestContinuity(unittest.TestCase):
    """Test d(rho)/dt + dJ/dx = 0 for a free packet."""

    @staticmethod
    def _residual(h: float, dt: float) -> float:
        spec = PacketSpec.single(center=0.0, width=1.0, k=1.0)
        g = grid_from_spacing("cartesian", -10.0, 10.0, h)
        snaps = [snapshot(spec, g, 1.0 + j * dt) for j in (-1, 0, 1)]
        return continuity_residual(snaps, spec.p).max_abs()

    def test_residual_small(self) -> None:
        """Residual <= 1e-4 at h = 0.01, dt = 1e-3."""
        self.assertLessEqual(self._residual(0.01, 1e-3), 1e-4)

    def test_second_order(self) -> None:
        """Joint refinement reduces the residual by about 4."""
        factor = self._residual(0.02, 2e-3) / self._residual(0.01, 1e-3)
        self.assertGreaterEqual(factor, 3.3)
        self.assertLessEqual(factor, 4.7)

    def test_snapshot_validation(self) -> None:
        """Fewer than 3 snapshots or uneven times are rejected."""
        spec = PacketSpec.single()
        g = grid_from_spacing("cartesian", -5.0, 5.0, 0.05)
        with self.assertRaises(DomainError):
            continuity_residual([snapshot(spec, g, 0.0), snapshot(spec, g, 0.1)], spec.p)
        with self.assertRaises(DomainError):
            continuity_residual([snapshot(spec, g, t) for t in (0.0, 0.1, 0.3)], spec.p)


class TestTrajectories(unittest.TestCase):
    """Test guidance-equation integration."""

    def test_plane_wave_uniform_motion(self) -> None:
        """x(t) = x0 + (hbar k / m) t."""
        wave = PlaneWave(k=2.0, p=PhysParams(mass=0.5))
        (traj,) = bohm_trajectories(wave, [0.3], t_end=1.0, dt=1e-3)
        self.assertAlmostEqual(traj.final_position, 0.3 + 4.0, delta=1e-10)
        self.assertFalse(traj.halted)
        self.assertEqual(traj.times.size, 1001)

    def test_stationary_state_is_static(self) -> None:
        """Real stationary states have zero velocity."""
        trajs = bohm_trajectories(harmonic_state(0), [-1.0, 0.5, 2.0], t_end=5.0, dt=0.01)
        for traj in trajs:
            np.testing.assert_array_equal(traj.positions, traj.initial_position)

    def test_halts_at_node(self) -> None:
        """A path started on a node stops immediately."""
        (traj,) = bohm_trajectories(harmonic_state(1), [0.0], t_end=1.0, dt=0.01)
        self.assertTrue(traj.halted)
        self.assertEqual(traj.positions.size, 1)

    def test_single_packet_spreading(self) -> None:
        """Free packet paths follow x_c + v t + (x0 - x_c) sigma_t / sigma."""
        spec = PacketSpec.single(center=0.0, width=1.0, k=1.0)
        (traj,) = bohm_trajectories(spec, [0.5], t_end=2.0, dt=0.01)
        t = traj.times
        expected = t + 0.5 * np.sqrt(1.0 + (t / 2.0) ** 2)
        np.testing.assert_allclose(traj.positions, expected, atol=1e-8)

    def test_symmetric_pair_never_crosses(self) -> None:
        """Ensembles of a symmetric superposition keep their side of x = 0."""
        spec = PacketSpec.two_gaussian(separation=2.0, width=1.0)
        x0 = sample_initial_positions(spec, 6)
        np.testing.assert_allclose(x0, -x0[::-1], atol=1e-6)
        for traj in bohm_trajectories(spec, x0, t_end=3.0, dt=0.01):
            self.assertTrue(np.all(np.sign(traj.positions) == np.sign(traj.initial_position)))

    def test_newton_residual_free_packet(self) -> None:
        """m x'' = -d V_Q / dx along a free-packet path at dt = 1e-3."""
        spec = PacketSpec.single(center=0.0, width=1.0, k=1.0)
        (traj,) = bohm_trajectories(spec, [0.5], t_end=2.0, dt=1e-3)
        self.assertLessEqual(newton_residual(traj, spec), 1e-3)

    def test_newton_residual_stationary(self) -> None:
        """A static path balances V + V_Q = E."""
        state = harmonic_state(0)
        (traj,) = bohm_trajectories(state, [1.0], t_end=1.0, dt=0.01)
        self.assertLessEqual(newton_residual(traj, state, potential=state.potential), 1e-6)

    def test_newton_residual_short(self) -> None:
        """Fewer than 5 samples cannot give an acceleration."""
        traj = Trajectory(np.arange(3) * 0.1, np.zeros(3), 0.0)
        with self.assertRaises(DomainError):
            newton_residual(traj, PacketSpec.single())

    def test_step_validation(self) -> None:
        """dt must be positive and shorter than the run."""
        with self.assertRaises(DomainError):
            bohm_trajectories(PlaneWave(k=1.0), [0.0], t_end=1.0, dt=0.0)
        with self.assertRaises(DomainError):
            bohm_trajectories(PlaneWave(k=1.0), [0.0], t_end=1e-4, dt=1e-3)


class TestTwoPacketEnsemble(unittest.TestCase):
    """Packets at +-4 sigma released at rest, followed to t = 8."""

    @classmethod
    def setUpClass(cls) -> None:
        cls.spec = PacketSpec.two_gaussian(separation=4.0, width=1.0)
        cls.x0 = np.array([-1.5, -1.0, -0.5, 0.5, 1.0, 1.5])
        cls.t_end = 8.0
        cls.trajs = bohm_trajectories(cls.spec, cls.x0, t_end=cls.t_end, dt=1e-3)
        cls.final = np.array([traj.final_position for traj in cls.trajs])

    def _cdf(self, x: np.ndarray, t: float) -> np.ndarray:
        lo, hi = self.spec.support(t)
        grid = np.linspace(lo, hi, 200001)
        cdf = cumulative_trapezoid(np.abs(self.spec.psi(grid, t)) ** 2, grid, initial=0.0)
        return np.interp(x, grid, cdf)

    def test_no_path_crosses_the_axis(self) -> None:
        for traj in self.trajs:
            self.assertFalse(traj.halted)
            self.assertTrue(np.all(np.sign(traj.positions) == np.sign(traj.initial_position)))

    def test_mirror_symmetry(self) -> None:
        np.testing.assert_allclose(self.final, -self.final[::-1], atol=1e-9)

    def test_born_quantiles_carried_along(self) -> None:
        """Non-crossing paths keep the mass to their left."""
        np.testing.assert_allclose(self._cdf(self.final, self.t_end), self._cdf(self.x0, 0.0), atol=1e-5)

    def test_paths_end_on_constructive_fringe(self) -> None:
        """Final positions sit next to a local maximum of |psi(x, 8)|."""
        x = np.linspace(-30.0, 30.0, 60001)
        modulus = self.spec.relative_modulus(x, self.t_end)
        peaks = x[1:-1][(modulus[1:-1] > modulus[:-2]) & (modulus[1:-1] > modulus[2:])]
        self.assertGreaterEqual(peaks.size, 3)
        spacing = float(np.min(np.diff(peaks)))
        for xf in self.final:
            self.assertLess(float(np.min(np.abs(peaks - xf))), 0.25 * spacing, msg=f"x = {xf}")
        valleys = x[1:-1][(modulus[1:-1] < modulus[:-2]) & (modulus[1:-1] < modulus[2:])]
        brightest_valley = float(np.max(self.spec.relative_modulus(valleys, self.t_end)))
        self.assertTrue(np.all(self.spec.relative_modulus(self.final, self.t_end) > brightest_valley))


class TestFringes(unittest.TestCase):
    """Test the late-time interference of two packets."""

    def test_destructive_point(self) -> None:
        """At tau = 1e4 the first dark fringe sits at pi tau / 4."""
        spec = PacketSpec.two_gaussian(separation=4.0, width=1.0)
        tau = 1e4
        t = 2.0 * tau  # tau = hbar t / (2 m sigma^2)
        guess = math.pi * tau / 4.0
        result = minimize_scalar(
            lambda x: float(spec.relative_modulus(np.array([x]), t)[0]),
            bounds=(0.5 * guess, 1.5 * guess),
            method="bounded",
        )
        self.assertLess(abs(result.x - guess) / guess, 1e-2)
        self.assertLess(result.fun, math.pi / tau)
        self.assertGreater(float(spec.relative_modulus(np.array([0.0]), t)[0]), 0.99)

    def test_colliding_packets_zero(self) -> None:
        """Packets meeting at the origin vanish at x = pi / (2 k0)."""
        k0 = 2.0
        spec = PacketSpec.two_gaussian(separation=4.0, width=1.0, k=k0)
        t = 4.0 / k0
        node = float(spec.relative_modulus(np.array([math.pi / (2.0 * k0)]), t)[0])
        self.assertLess(node, 1e-12)


class TestEnsembles(unittest.TestCase):
    """Test Born sampling and final-position histograms."""

    def test_median_at_center(self) -> None:
        """The middle of three quantiles is the packet center."""
        x0 = sample_initial_positions(PacketSpec.single(center=1.5, width=0.5), 3)
        self.assertAlmostEqual(float(x0[1]), 1.5, places=6)
        self.assertTrue(np.all(np.diff(x0) > 0.0))

    def test_sampling_errors(self) -> None:
        """count < 1, or a plane wave without a window, is rejected."""
        with self.assertRaises(DomainError):
            sample_initial_positions(PacketSpec.single(), 0)
        with self.assertRaises(DomainError):
            sample_initial_positions(PlaneWave(k=1.0), 4)

    def test_plane_wave_with_window(self) -> None:
        """Uniform density gives evenly spaced quantiles."""
        x0 = sample_initial_positions(PlaneWave(k=1.0), 4, window=(0.0, 1.0))
        np.testing.assert_allclose(x0, [0.125, 0.375, 0.625, 0.875], atol=1e-9)

    def test_histogram(self) -> None:
        """Counts cover completed trajectories only."""
        trajs = [
            Trajectory(np.array([0.0, 1.0]), np.array([0.0, 0.2]), 0.0),
            Trajectory(np.array([0.0, 1.0]), np.array([0.0, 0.8]), 0.0),
            Trajectory(np.array([0.0]), np.array([0.5]), 0.5, halted=True),
        ]
        counts, edges = final_position_histogram(trajs, bins=2, value_range=(0.0, 1.0))
        np.testing.assert_array_equal(counts, [1, 1])
        self.assertEqual(edges.size, 3)
        with self.assertRaises(InsufficientDataError):
            final_position_histogram(trajs[2:])


if __name__ == "__main__":
    unittest.main()
