"""Unit tests for grids, fields and finite-difference calculus.

Validation criteria:
- Grids reject degenerate bounds and negative radial starts
- Fields are immutable and finite
- Laplacian is exact on quadratics and second order on smooth functions
- Radial measure and s-wave Laplacian behave as 4 pi r^2 dr and f'' + 2f'/r
"""

import unittest

import numpy as np

from bohm_lab.errors import DomainError, NormalizationError
from bohm_lab.numerics.fields import (
    Field,
    FieldMeaning,
    GridKind,
    MaskedField,
    add,
    gradient,
    grid_from_spacing,
    integrate,
    laplacian,
    make_uniform_grid,
    norm_squared,
    normalize,
    restrict,
    sample,
)


class TestGrid(unittest.TestCase):
    """Test grid construction."""

    def test_spacing_and_points(self) -> None:
        """h = (x_max - x_min)/(n - 1) and points run from x_min to x_max."""
        g = make_uniform_grid("cartesian", -1.0, 1.0, 5)
        self.assertEqual(g.h, 0.5)
        np.testing.assert_allclose(g.points, [-1.0, -0.5, 0.0, 0.5, 1.0])
        self.assertEqual(g.coordinate_name, "x")

    def test_grid_from_spacing_point_count(self) -> None:
        """Spacing 0.01 on [-6, 6] gives 1201 points."""
        g = grid_from_spacing(GridKind.CARTESIAN, -6.0, 6.0, 0.01)
        self.assertEqual(g.n, 1201)
        self.assertAlmostEqual(g.h, 0.01, places=15)

    def test_rejects_too_few_points(self) -> None:
        """Fewer than 3 points is a domain error."""
        with self.assertRaises(DomainError):
            make_uniform_grid("cartesian", 0.0, 1.0, 2)

    def test_rejects_reversed_bounds(self) -> None:
        """x_min must be below x_max."""
        with self.assertRaises(DomainError):
            make_uniform_grid("cartesian", 1.0, 0.0, 10)

    def test_rejects_negative_radial_start(self) -> None:
        """Radial grids live on r >= 0."""
        with self.assertRaises(DomainError):
            make_uniform_grid("radial", -0.1, 1.0, 10)

    def test_rejects_unknown_kind(self) -> None:
        """Only cartesian and radial grids exist."""
        with self.assertRaises(DomainError):
            make_uniform_grid("spherical", 0.0, 1.0, 10)

    def test_index_of_lattice_point(self) -> None:
        """index_of finds lattice points and rejects off-lattice values."""
        g = grid_from_spacing("cartesian", -3.0, 3.0, 0.002)
        self.assertEqual(g.index_of(0.0), 1500)
        with self.assertRaises(DomainError):
            g.index_of(0.001)

    def test_radial_measure(self) -> None:
        """Radial weight is 4 pi r^2."""
        g = make_uniform_grid("radial", 0.0, 2.0, 3)
        np.testing.assert_allclose(g.measure(), [0.0, 4.0 * np.pi, 16.0 * np.pi])
        self.assertEqual(g.coordinate_name, "r")


class TestField(unittest.TestCase):
    """Test field invariants."""

    def setUp(self) -> None:
        self.grid = make_uniform_grid("cartesian", 0.0, 1.0, 11)

    def test_values_are_read_only(self) -> None:
        """Field values cannot be modified in place."""
        f = Field(self.grid, np.zeros(11))
        with self.assertRaises(ValueError):
            f.values[0] = 1.0

    def test_rejects_non_finite(self) -> None:
        """NaN entries are rejected."""
        values = np.zeros(11)
        values[3] = np.nan
        with self.assertRaises(DomainError):
            Field(self.grid, values)

    def test_rejects_length_mismatch(self) -> None:
        """Value count must equal the grid size."""
        with self.assertRaises(DomainError):
            Field(self.grid, np.zeros(10))

    def test_normalized_flag_is_checked(self) -> None:
        """Claiming normalization of an unnormalized amplitude fails."""
        with self.assertRaises(NormalizationError):
            Field(self.grid, np.ones(11) * 3.0, FieldMeaning.AMPLITUDE, normalized=True)

    def test_caller_array_is_copied(self) -> None:
        """Mutating the source array does not change the field."""
        values = np.ones(11)
        f = Field(self.grid, values)
        values[0] = 5.0
        self.assertEqual(f.values[0], 1.0)

    def test_masked_field_nan_view(self) -> None:
        """as_array shows masked entries as NaN; non-finite input is masked."""
        raw = np.arange(11, dtype=float)
        raw[4] = np.inf
        mask = np.ones(11, dtype=bool)
        mask[0] = False
        mf = MaskedField.from_array(self.grid, raw, mask)
        arr = mf.as_array()
        self.assertTrue(np.isnan(arr[0]))
        self.assertTrue(np.isnan(arr[4]))
        self.assertEqual(arr[5], 5.0)
        self.assertAlmostEqual(mf.masked_fraction, 2.0 / 11.0)


class TestCalculus(unittest.TestCase):
    """Test finite-difference operators."""

    def test_laplacian_exact_on_quadratic(self) -> None:
        """The 3-point stencil is exact for x^2."""
        g = make_uniform_grid("cartesian", -1.0, 1.0, 21)
        lap = laplacian(sample(g, lambda x: x**2))
        np.testing.assert_allclose(lap.valid_values, 2.0, atol=1e-10)
        self.assertFalse(lap.mask[0])
        self.assertFalse(lap.mask[-1])
        # flagged endpoints copy their neighbour
        self.assertEqual(lap.values[0], lap.values[1])

    def test_laplacian_second_order(self) -> None:
        """Error on sin(x) drops by about 4 when h halves."""
        errors = []
        for n in (101, 201):
            g = make_uniform_grid("cartesian", 0.0, np.pi, n)
            lap = laplacian(sample(g, np.sin))
            err = np.abs(lap.values + np.sin(g.points))[lap.mask].max()
            errors.append(err)
        self.assertGreater(errors[0] / errors[1], 3.8)
        self.assertLess(errors[0] / errors[1], 4.2)

    def test_radial_laplacian_of_gaussian(self) -> None:
        """s-wave Laplacian of exp(-r^2) is (4r^2 - 6) exp(-r^2)."""
        g = grid_from_spacing("radial", 0.0, 5.0, 0.001)
        lap = laplacian(sample(g, lambda r: np.exp(-(r**2))))
        r = g.points
        exact = (4.0 * r**2 - 6.0) * np.exp(-(r**2))
        self.assertFalse(lap.mask[0])
        np.testing.assert_allclose(lap.values[lap.mask], exact[lap.mask], atol=1e-5)

    def test_radial_origin_with_even_symmetry(self) -> None:
        """With the even hint the origin is valid: laplacian(0) = 3 f''(0) = -6."""
        g = grid_from_spacing("radial", 0.0, 5.0, 0.001)
        lap = laplacian(sample(g, lambda r: np.exp(-(r**2))), even_symmetry=True)
        self.assertTrue(lap.mask[0])
        self.assertAlmostEqual(lap.values[0], -6.0, places=4)

    def test_gradient(self) -> None:
        """Central difference is exact for quadratics."""
        g = make_uniform_grid("cartesian", 0.0, 2.0, 21)
        grad = gradient(sample(g, lambda x: x**2))
        np.testing.assert_allclose(grad.valid_values, 2.0 * g.points[1:-1], atol=1e-12)

    def test_integrate_radial_measure(self) -> None:
        """Integral of exp(-r) with 4 pi r^2 dr is 8 pi."""
        g = grid_from_spacing("radial", 0.0, 60.0, 0.001)
        self.assertAlmostEqual(integrate(sample(g, lambda r: np.exp(-r))), 8.0 * np.pi, places=5)

    def test_normalize_gaussian(self) -> None:
        """Unit-width Gaussian normalizes to pi^(-1/4) at the peak."""
        g = make_uniform_grid("cartesian", -10.0, 10.0, 2001)
        R = normalize(sample(g, lambda x: np.exp(-(x**2) / 2.0), FieldMeaning.AMPLITUDE))
        self.assertTrue(R.normalized)
        self.assertAlmostEqual(norm_squared(R), 1.0, places=12)
        self.assertAlmostEqual(R.values[1000], np.pi**-0.25, places=8)

    def test_normalize_rejects_zero_and_non_amplitudes(self) -> None:
        """Zero amplitudes and potentials cannot be normalized."""
        g = make_uniform_grid("cartesian", 0.0, 1.0, 11)
        with self.assertRaises(NormalizationError):
            normalize(Field(g, np.zeros(11), FieldMeaning.AMPLITUDE))
        with self.assertRaises(DomainError):
            normalize(Field(g, np.ones(11), FieldMeaning.POTENTIAL))

    def test_restrict_keeps_lattice(self) -> None:
        """A restricted field keeps the spacing and the values."""
        g = grid_from_spacing("cartesian", -2.0, 2.0, 0.5)
        f = sample(g, lambda x: x)
        sub = restrict(f, -1.0, 1.0)
        self.assertEqual(sub.grid.n, 5)
        self.assertAlmostEqual(sub.grid.h, 0.5)
        np.testing.assert_allclose(sub.values, [-1.0, -0.5, 0.0, 0.5, 1.0])
        with self.assertRaises(DomainError):
            restrict(f, -3.0, 1.0)

    def test_add_requires_same_grid(self) -> None:
        """Fields on different grids cannot be added."""
        a = Field(make_uniform_grid("cartesian", 0.0, 1.0, 11), np.ones(11))
        b = Field(make_uniform_grid("cartesian", 0.0, 2.0, 11), np.ones(11))
        self.assertEqual(add(a, a).values[0], 2.0)
        with self.assertRaises(DomainError):
            add(a, b)


if __name__ == "__main__":
    unittest.main()
