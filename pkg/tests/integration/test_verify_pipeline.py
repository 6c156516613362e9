"""Integration tests for the verify pipeline.

Runs the full LangGraph workflow:
- Box and oscillator families on their default windows
- Refinement loop (h halved until the two-grid change is small)
- Potential read from CSV (fixed grid, no refinement)

Validates:
1. Energies against closed forms
2. Identity pass/fail and the refinement budget
3. Input errors surface before any solve
"""

import math
import tempfile
import unittest
from pathlib import Path

import numpy as np

from bohm_lab.data.serialization import write_field_csv
from bohm_lab.errors import DomainError
from bohm_lab.numerics.analytic import FamilyTag, ReferenceFamily, classical_potential_field
from bohm_lab.numerics.fields import Field, FieldMeaning, grid_from_spacing
from bohm_lab.numerics.qpotential import PhysParams
from bohm_lab.pipelines.verify import (
    PotentialSource,
    VerifyState,
    build_verify_pipeline,
    run_verify_pipeline,
)


class TestVerifyWorkflow(unittest.TestCase):
    """Full runs over analytic families."""

    def test_pipeline_compiles(self) -> None:
        """The compiled graph exposes invoke."""
        self.assertTrue(hasattr(build_verify_pipeline(), "invoke"))

    def test_box_ground_state(self) -> None:
        """Box ground state converges on the default grid without refinement."""
        state = VerifyState(family="box", params={"mass": 1.0, "length": 1.0})
        result = run_verify_pipeline(state)

        self.assertAlmostEqual(result.energy, math.pi**2 / 2.0, places=4)
        self.assertEqual(result.nodes, 0)
        self.assertEqual(result.refinements, 0)
        self.assertTrue(result.converged)
        self.assertTrue(result.identity_passed)
        self.assertFalse(result.needs_refinement)
        self.assertEqual(result.source, PotentialSource.FAMILY)
        self.assertLess(result.energy_change, 1e-4)

    def test_refinement_budget(self) -> None:
        """An unreachable energy tolerance spends every refinement and stops."""
        state = VerifyState(
            family="box",
            params={"mass": 1.0, "length": 1.0},
            energy_tolerance=1e-12,
            max_refinements=2,
        )
        result = run_verify_pipeline(state)

        self.assertEqual(result.refinements, 2)
        self.assertFalse(result.converged)
        self.assertFalse(result.needs_refinement)
        self.assertAlmostEqual(result.h, 1e-3 / 4.0)
        self.assertEqual(result.solution.amplitude.grid.n, 4001)
        self.assertAlmostEqual(result.energy, math.pi**2 / 2.0, places=5)
        self.assertEqual(result.validation_metrics["converged"], "WARN")

    def test_excited_oscillator(self) -> None:
        """Second excited state passes the identity with nodes masked."""
        state = VerifyState(
            family="harmonic",
            params={"mass": 1.0, "omega": 1.0},
            n=2,
            node_tol=1e-3,
        )
        result = run_verify_pipeline(state)

        self.assertAlmostEqual(result.energy, 2.5, places=3)
        self.assertEqual(result.nodes, 2)
        self.assertTrue(result.identity_passed)
        self.assertGreater(result.report.masked_fraction, 0.0)
        self.assertAlmostEqual(result.tolerance_used, 2.5e-3, delta=1e-5)
        self.assertEqual(result.exact_energy, 2.5)
        self.assertEqual(result.validation_metrics["nodes"], "PASS")

    def test_hbar_scales_energy(self) -> None:
        """With hbar = 2 the oscillator ground energy is hbar*omega/2 = 1."""
        state = VerifyState(family="harmonic", params={"mass": 1.0, "omega": 1.0}, hbar=2.0)
        result = run_verify_pipeline(state)

        self.assertAlmostEqual(result.energy, 1.0, places=3)
        self.assertTrue(result.identity_passed)

    def test_tight_residual_tolerance_fails(self) -> None:
        """A residual tolerance below roundoff reports failure without raising."""
        state = VerifyState(
            family="box", params={"mass": 1.0, "length": 1.0}, residual_tolerance=1e-30
        )
        result = run_verify_pipeline(state)

        self.assertFalse(result.identity_passed)
        self.assertEqual(result.validation_metrics["identity"], "FAIL")
        self.assertEqual(result.tolerance_used, 1e-30)


class TestVerifyFromCSV(unittest.TestCase):
    """Potential supplied as a table."""

    def setUp(self) -> None:
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / "harmonic.csv"
        fam = ReferenceFamily(FamilyTag.HARMONIC, PhysParams(mass=1.0), omega=1.0)
        grid = grid_from_spacing("cartesian", -12.0, 12.0, 0.01)
        write_field_csv(classical_potential_field(fam, grid), self.path)

    def tearDown(self) -> None:
        self.tmp.cleanup()

    def test_csv_potential(self) -> None:
        """CSV run solves on the file's grid and skips refinement."""
        state = VerifyState(potential_path=str(self.path), params={"mass": 1.0})
        result = run_verify_pipeline(state)

        self.assertEqual(result.source, PotentialSource.CSV)
        self.assertAlmostEqual(result.energy, 0.5, places=4)
        self.assertTrue(result.converged)
        self.assertIsNone(result.energy_change)
        self.assertEqual(result.refinements, 0)
        self.assertTrue(result.identity_passed)
        self.assertAlmostEqual(result.h, 0.01)
        self.assertNotIn("energy_change", result.validation_metrics)

    def test_both_sources_rejected(self) -> None:
        """A family and a file at once is ambiguous."""
        state = VerifyState(
            family="harmonic",
            potential_path=str(self.path),
            params={"mass": 1.0, "omega": 1.0},
        )
        with self.assertRaises(DomainError):
            run_verify_pipeline(state)


class TestVerifyErrors(unittest.TestCase):
    """Invalid requests fail in build_potential."""

    def test_no_source(self) -> None:
        with self.assertRaises(DomainError):
            run_verify_pipeline(VerifyState(params={"mass": 1.0}))

    def test_missing_mass(self) -> None:
        with self.assertRaises(DomainError):
            run_verify_pipeline(VerifyState(family="box", params={"length": 1.0}))

    def test_continuum_family(self) -> None:
        """The step family has no bound states to verify."""
        with self.assertRaises(DomainError):
            run_verify_pipeline(VerifyState(family="step", params={"mass": 1.0, "v0": 1.5}))

    def test_free_potential_file(self) -> None:
        """A flat potential on an open line has no bound state."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "free.csv"
            grid = grid_from_spacing("cartesian", -5.0, 5.0, 0.05)
            write_field_csv(Field(grid, np.zeros(grid.n), FieldMeaning.POTENTIAL), path)
            with self.assertRaises(DomainError):
                run_verify_pipeline(VerifyState(potential_path=str(path), params={"mass": 1.0}))


class TestVerifyOutput(unittest.TestCase):
    """State serialization and metrics."""

    @classmethod
    def setUpClass(cls) -> None:
        cls.result = run_verify_pipeline(
            VerifyState(family="harmonic", params={"mass": 1.0, "omega": 0.5})
        )

    def test_validation_metrics(self) -> None:
        for key in ("energy", "energy_error", "nodes", "identity", "max_residual", "converged", "h"):
            self.assertIn(key, self.result.validation_metrics)
        self.assertEqual(self.result.validation_metrics["identity"], "PASS")

    def test_to_dict(self) -> None:
        """to_dict carries the report as a plain dict."""
        out = self.result.to_dict()
        self.assertEqual(out["family"], "harmonic")
        self.assertAlmostEqual(out["energy"], 0.25, places=4)
        self.assertIn("max_residual", out["report"])
        self.assertTrue(out["identity_passed"])

    def test_convergence_factor(self) -> None:
        """Energy error drops by about four under halving."""
        self.assertIsNotNone(self.result.convergence_factor)
        self.assertGreater(self.result.convergence_factor, 3.5)
        self.assertLess(self.result.convergence_factor, 4.5)


if __name__ == "__main__":
    unittest.main()
