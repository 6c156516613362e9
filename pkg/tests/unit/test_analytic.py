"""Unit tests for the closed-form reference families."""

import json
import math
import unittest
from pathlib import Path

import numpy as np
from scipy import special
from scipy.integrate import trapezoid

from bohm_lab.errors import DomainError, NoDiscreteEnergyError
from bohm_lab.numerics.analytic import (
    FamilyTag,
    ReferenceFamily,
    classical_potential_field,
    default_grid,
    default_window,
    reference_amplitude,
    reference_classical_potential,
    reference_energy,
    reference_quantum_potential,
)
from bohm_lab.numerics.fields import GridKind, grid_from_spacing
from bohm_lab.numerics.qpotential import PhysParams

FIXTURES = Path(__file__).parent.parent / "fixtures" / "reference"


class TestReferenceFamily(unittest.TestCase):
    """Test family construction."""

    def test_from_params(self) -> None:
        """Flat parameter dicts build families; hbar defaults to the argument."""
        fam = ReferenceFamily.from_params("harmonic", {"mass": 1.0, "omega": 0.5}, hbar=2.0)
        self.assertEqual(fam.tag, FamilyTag.HARMONIC)
        self.assertEqual(fam.p.hbar, 2.0)
        self.assertAlmostEqual(fam.oscillator_length, 2.0)

    def test_to_dict(self) -> None:
        """Only the family's own constant is reported."""
        fam = ReferenceFamily.from_params("linear_airy", {"mass": 1.0, "kappa": 0.1, "branch": "Bi"})
        self.assertEqual(
            fam.to_dict(), {"family": "linear_airy", "mass": 1.0, "hbar": 1.0, "kappa": 0.1, "branch": "Bi"}
        )

    def test_rejections(self) -> None:
        """Unknown family, missing mass or constant."""
        with self.assertRaises(DomainError):
            ReferenceFamily.from_params("morse", {"mass": 1.0})
        with self.assertRaises(DomainError):
            ReferenceFamily.from_params("harmonic", {"omega": 0.5})
        with self.assertRaises(DomainError):
            ReferenceFamily.from_params("harmonic", {"mass": 1.0})
        with self.assertRaises(DomainError):
            ReferenceFamily.from_params("step", {"mass": 1.0, "v0": -1.0})

    def test_derived_scales(self) -> None:
        """Bohr radius, step wavenumber and Airy scale."""
        with open(FIXTURES / "reference_values.json") as f:
            ref = json.load(f)["hydrogen_s"]
        hyd = ReferenceFamily.from_params("hydrogen_s", {"mass": 0.511, "charge": 1.0})
        self.assertAlmostEqual(hyd.bohr_radius, ref["bohr_radius"], places=12)
        step = ReferenceFamily.from_params("step", {"mass": 1.0, "v0": 1.5})
        self.assertAlmostEqual(step.step_wavenumber, math.sqrt(3.0))
        airy = ReferenceFamily.from_params("linear_airy", {"mass": 1.0, "kappa": 0.1})
        self.assertAlmostEqual(airy.linear_k1, 0.2)


class TestReferenceValues(unittest.TestCase):
    """Test amplitudes, energies and potentials."""

    def setUp(self) -> None:
        self.harmonic = ReferenceFamily.from_params("harmonic", {"mass": 1.0, "omega": 0.5})
        self.hydrogen = ReferenceFamily.from_params("hydrogen_s", {"mass": 0.511, "charge": 1.0})
        self.box = ReferenceFamily.from_params("box", {"mass": 1.0, "length": 1.0})

    def test_harmonic_amplitudes_orthonormal(self) -> None:
        """Hermite-Gaussian states are orthonormal."""
        x = np.linspace(-15.0, 15.0, 6001)
        states = [reference_amplitude(self.harmonic, n, x) for n in range(5)]
        gram = np.array([[trapezoid(a * b, x) for b in states] for a in states])
        np.testing.assert_allclose(gram, np.eye(5), atol=1e-9)

    def test_harmonic_against_scipy_hermite(self) -> None:
        """R_3 uses the physicists' H_3."""
        x = np.linspace(-3.0, 3.0, 13)
        xi = math.sqrt(0.5) * x
        expected = (0.5 / math.pi) ** 0.25 / math.sqrt(8.0 * 6.0) * special.eval_hermite(3, xi) * np.exp(-xi**2 / 2)
        np.testing.assert_allclose(reference_amplitude(self.harmonic, 3, x), expected, rtol=1e-12, atol=1e-14)

    def test_energies(self) -> None:
        """Closed-form E_n."""
        self.assertEqual(reference_energy(self.harmonic, 2), 1.25)
        self.assertAlmostEqual(reference_energy(self.hydrogen, 0), -0.2555)
        self.assertAlmostEqual(reference_energy(self.box, 1), 2.0 * math.pi**2)

    def test_continuum_has_no_energy(self) -> None:
        """Step and linear families have no discrete energy."""
        step = ReferenceFamily.from_params("step", {"mass": 1.0, "v0": 1.5})
        with self.assertRaises(NoDiscreteEnergyError):
            reference_energy(step, 0)
        with self.assertRaises(NoDiscreteEnergyError):
            default_window(step)

    def test_quantum_number_limits(self) -> None:
        """hydrogen_s supports n = 0 only; harmonic n <= 20."""
        with self.assertRaises(DomainError):
            reference_amplitude(self.hydrogen, 1, 1.0)
        with self.assertRaises(DomainError):
            reference_energy(self.harmonic, 21)
        with self.assertRaises(DomainError):
            reference_amplitude(self.hydrogen, 0, -1.0)

    def test_hydrogen_normalized(self) -> None:
        """Integral of R^2 4 pi r^2 dr is 1."""
        r = np.linspace(0.0, 60.0, 60001)
        R = reference_amplitude(self.hydrogen, 0, r)
        self.assertAlmostEqual(float(trapezoid(R * R * 4.0 * math.pi * r * r, r)), 1.0, places=6)

    def test_box_zero_outside(self) -> None:
        """Box states vanish outside [0, L]."""
        values = reference_amplitude(self.box, 0, np.array([-0.5, 0.5, 1.5]))
        np.testing.assert_allclose(values, [0.0, math.sqrt(2.0), 0.0])

    def test_potentials(self) -> None:
        """Targets carry no offset and the classical potential is their negative."""
        self.assertEqual(reference_quantum_potential(self.harmonic, 2.0), -0.5)
        self.assertEqual(reference_classical_potential(self.harmonic, 2.0), 0.5)
        self.assertEqual(reference_quantum_potential(self.hydrogen, 0.5), 2.0)
        self.assertEqual(reference_classical_potential(self.box, 0.3), 0.0)
        airy = ReferenceFamily.from_params("linear_airy", {"mass": 1.0, "kappa": 0.1})
        self.assertAlmostEqual(reference_quantum_potential(airy, 3.0), 0.3)

    def test_step_amplitude(self) -> None:
        """R = 1 left of the step, cos(k x) right of it."""
        step = ReferenceFamily.from_params("step", {"mass": 1.0, "v0": 1.5})
        values = reference_amplitude(step, 0, np.array([-1.0, 0.0, 1.0]))
        np.testing.assert_allclose(values, [1.0, 1.0, math.cos(math.sqrt(3.0))])

    def test_airy_branches(self) -> None:
        """linear_airy amplitude is Ai or Bi of -k1^(1/3) x."""
        x = np.array([-2.0, 0.0, 3.0])
        arg = -(0.2 ** (1.0 / 3.0)) * x
        ai, _, bi, _ = special.airy(arg)
        for branch, expected in (("Ai", ai), ("Bi", bi)):
            fam = ReferenceFamily.from_params("linear_airy", {"mass": 1.0, "kappa": 0.1, "branch": branch})
            np.testing.assert_allclose(reference_amplitude(fam, 0, x), expected, rtol=1e-9)


class TestSampledFields(unittest.TestCase):
    """Test grid sampling and default windows."""

    def test_radial_origin_is_finite(self) -> None:
        """The Coulomb origin is filled with the value at r = h."""
        fam = ReferenceFamily.from_params("hydrogen_s", {"mass": 0.511, "charge": 1.0})
        g = grid_from_spacing("radial", 0.0, 10.0, 0.01)
        V = classical_potential_field(fam, g)
        self.assertEqual(V.values[0], V.values[1])
        self.assertAlmostEqual(V.values[1], -100.0)

    def test_default_windows(self) -> None:
        """Windows scale with the natural length of each family."""
        harmonic = ReferenceFamily.from_params("harmonic", {"mass": 1.0, "omega": 0.5})
        kind, lo, hi, h = default_window(harmonic)
        self.assertEqual(kind, GridKind.CARTESIAN)
        self.assertAlmostEqual(hi, 12.0 * math.sqrt(2.0))
        self.assertAlmostEqual(lo, -hi)

        hydrogen = ReferenceFamily.from_params("hydrogen_s", {"mass": 0.511, "charge": 1.0})
        self.assertEqual(default_grid(hydrogen).kind, GridKind.RADIAL)
        self.assertEqual(default_grid(hydrogen).x_min, 0.0)

        box = ReferenceFamily.from_params("box", {"mass": 1.0, "length": 2.0})
        self.assertEqual(default_grid(box).n, 1001)


if __name__ == "__main__":
    unittest.main()
