#!/usr/bin/env python3
"""
tests/test_series_core.py — Unit tests for shared_tools.series_core

Coverage:
    1. Construction, box and immutability
    2. Truncated products and exact polynomial products
    3. reciprocal() against closed forms and the f * g = 1 identity
    4. Derivatives, dilation, reflection and variable swap
    5. diagonal_extract() / embed_diagonal() and NotDiagonal
    6. bidegree / trim / depends_on
    7. mobius_precompose() on the branch-point example
    8. Evaluation helpers and z1-slices
    9. Random-series identities: commutativity, associativity, reciprocal round trip,
       torus modulus of the reflection, composed dilations, diagonal round trip

Run:
    python3 -m unittest tests.test_series_core -v
    # or
    python3 -m pytest tests/test_series_core.py -v
"""

import sys
import unittest
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from shared_tools.lab_errors import NotDiagonal, ParameterOutOfRange, ZeroConstantTerm
from shared_tools.series_core import (
    BivariateSeries,
    add,
    bidegree,
    coefficient_slice,
    constant,
    depends_on,
    diagonal_extract,
    dilate_z1,
    embed_diagonal,
    evaluate,
    evaluate_many,
    evaluate_grid,
    from_one_variable,
    max_coefficient_gap,
    mobius_precompose,
    monomial,
    multiply,
    pad_to_box,
    partial_derivative,
    polynomial_product,
    reciprocal,
    reflect,
    scale,
    slice_coefficients,
    subtract,
    swap_variables,
    trim,
)
from shared_tools.series_io import parse_polynomial


class TestConstruction(unittest.TestCase):
    """Shape handling of BivariateSeries."""

    def test_vector_becomes_column(self):
        """A 1-D coefficient list is a series in z1."""
        f = BivariateSeries([1.0, 2.0, 3.0])
        self.assertEqual(f.box, (2, 0))
        self.assertEqual(f.constant_term, 1.0)

    def test_coefficients_are_read_only(self):
        f = monomial(1, 2, 3.0)
        with self.assertRaises(ValueError):
            f.coeffs[0, 0] = 5.0

    def test_rejects_non_finite(self):
        with self.assertRaises(ValueError):
            BivariateSeries([[1.0, np.nan]])

    def test_from_one_variable_axis(self):
        self.assertEqual(from_one_variable([1, 2], axis=0).box, (1, 0))
        self.assertEqual(from_one_variable([1, 2], axis=1).box, (0, 1))
        with self.assertRaises(ValueError):
            from_one_variable([1, 2], axis=2)

    def test_pad_to_box(self):
        f = pad_to_box(constant(2.0), (2, 3))
        self.assertEqual(f.box, (2, 3))
        self.assertEqual(f.coeffs[0, 0], 2.0)
        self.assertEqual(np.count_nonzero(f.coeffs), 1)


class TestArithmetic(unittest.TestCase):
    """Sums and Cauchy products."""

    def test_add_and_subtract_align_boxes(self):
        f = add(monomial(2, 0), monomial(0, 1))
        self.assertEqual(f.box, (2, 1))
        self.assertEqual(max_coefficient_gap(subtract(f, f), constant(0.0)), 0.0)

    def test_product_of_linear_factors(self):
        """(1 - z1)(1 - z2) = 1 - z1 - z2 + z1 z2."""
        prod = polynomial_product(parse_polynomial("1 - z1"), parse_polynomial("1 - z2"))
        expected = np.array([[1, -1], [-1, 1]], dtype=complex)
        np.testing.assert_allclose(prod.coeffs, expected)

    def test_truncated_product(self):
        f = parse_polynomial("1 + z1 + z2")
        g = multiply(f, f, (1, 1))
        # (1 + z1 + z2)^2 truncated to degree <= 1 in each variable
        expected = np.array([[1, 2], [2, 2]], dtype=complex)
        np.testing.assert_allclose(g.coeffs, expected)

    def test_scale(self):
        np.testing.assert_allclose(scale(monomial(1, 1), 2j).coeffs[1, 1], 2j)


class TestReciprocal(unittest.TestCase):
    """Power-series inverses on a box."""

    def test_geometric_series(self):
        """1 / (1 - z1 z2) = sum (z1 z2)^k."""
        g = reciprocal(parse_polynomial("1 - z1*z2"), (6, 6))
        np.testing.assert_allclose(g.coeffs, np.eye(7), atol=1e-14)

    def test_two_variable_inverse(self):
        """f * (1/f) = 1 on the box for a genuinely two-variable f."""
        f = parse_polynomial("2 - z1 - z2 + 0.5*z1*z2")
        g = reciprocal(f, (8, 8))
        prod = multiply(f, g, (8, 8))
        target = np.zeros((9, 9))
        target[0, 0] = 1.0
        np.testing.assert_allclose(prod.coeffs, target, atol=1e-12)

    def test_zero_constant_term(self):
        with self.assertRaises(ZeroConstantTerm):
            reciprocal(parse_polynomial("z1 + z2"), (3, 3))


class TestTransforms(unittest.TestCase):
    """Derivatives, dilation, reflection, swap."""

    def test_partial_derivative(self):
        f = parse_polynomial("z1^3*z2 + z2^2")
        d1 = partial_derivative(f, axis=0)
        self.assertEqual(d1.coeffs[2, 1], 3.0)
        d2 = partial_derivative(f, axis=1, order=2)
        self.assertEqual(d2.coeffs[0, 0], 2.0)
        self.assertIs(partial_derivative(f, axis=0, order=0), f)

    def test_dilate_z1(self):
        f = dilate_z1(parse_polynomial("1 + z1^2*z2"), 0.5)
        self.assertAlmostEqual(f.coeffs[2, 1].real, 0.25)
        with self.assertRaises(ParameterOutOfRange):
            dilate_z1(f, 0.0)

    def test_reflect_of_linear(self):
        """The reflection of 2 - z1 - z2 is 2 z1 z2 - z1 - z2."""
        r = reflect(parse_polynomial("2 - z1 - z2"))
        np.testing.assert_allclose(r.coeffs, np.array([[0, -1], [-1, 2]], dtype=complex))

    def test_swap(self):
        f = swap_variables(parse_polynomial("z1^2"))
        self.assertEqual(f.box, (0, 2))


class TestDiagonal(unittest.TestCase):
    """Diagonal embedding and extraction."""

    def test_roundtrip_coefficients(self):
        f = embed_diagonal([1.0, -1.0, 0.5])
        np.testing.assert_allclose(diagonal_extract(f), [1.0, -1.0, 0.5])

    def test_not_diagonal(self):
        with self.assertRaises(NotDiagonal):
            diagonal_extract(parse_polynomial("2 - z1 - z2"))


def _random_series(rng, max_box=3, lead=None):
    """Complex coefficients bounded by 1 on a random box; ``lead`` fixes |f(0,0)|."""
    shape = tuple(int(v) for v in rng.integers(1, max_box + 2, size=2))
    coeffs = rng.uniform(-1, 1, size=shape) + 1j * rng.uniform(-1, 1, size=shape)
    coeffs /= np.maximum(np.abs(coeffs), 1.0)
    if lead is not None:
        coeffs[0, 0] = lead * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
    return BivariateSeries(coeffs)


class TestAlgebraicProperties(unittest.TestCase):
    """Identities checked on seeded random series."""

    def setUp(self):
        self.rng = np.random.default_rng(2024)

    def test_multiply_commutes(self):
        for _ in range(20):
            f, g = _random_series(self.rng), _random_series(self.rng)
            box = tuple(int(v) for v in self.rng.integers(0, 7, size=2))
            np.testing.assert_allclose(multiply(f, g, box).coeffs, multiply(g, f, box).coeffs, rtol=0, atol=1e-13)

    def test_multiply_associates(self):
        for _ in range(20):
            f, g, h = (_random_series(self.rng) for _ in range(3))
            box = (5, 4)
            left = multiply(multiply(f, g, box), h, box)
            right = multiply(f, multiply(g, h, box), box)
            np.testing.assert_allclose(left.coeffs, right.coeffs, rtol=0, atol=1e-13)

    def test_reciprocal_round_trip(self):
        box = (5, 5)
        target = np.zeros((6, 6))
        target[0, 0] = 1.0
        for _ in range(20):
            f = _random_series(self.rng, max_box=2, lead=self.rng.uniform(0.5, 1.0))
            g = reciprocal(f, box)
            # roundoff in the product scales with the size of the inverse coefficients
            scale_ = max(1.0, float(np.abs(g.coeffs).max() * np.abs(f.coeffs).sum()))
            np.testing.assert_allclose(multiply(f, g, box).coeffs, target, rtol=0, atol=1e-12 * scale_)

    def test_reflect_keeps_torus_modulus(self):
        for _ in range(10):
            p = _random_series(self.rng)
            z1 = np.exp(1j * self.rng.uniform(0.0, 2.0 * np.pi, size=1000))
            z2 = np.exp(1j * self.rng.uniform(0.0, 2.0 * np.pi, size=1000))
            np.testing.assert_allclose(np.abs(evaluate_many(reflect(p), z1, z2)),
                                       np.abs(evaluate_many(p, z1, z2)), rtol=0, atol=1e-10)

    def test_dilations_compose(self):
        for _ in range(20):
            f = _random_series(self.rng, max_box=6)
            r, s = self.rng.uniform(0.05, 1.0, size=2)
            np.testing.assert_allclose(dilate_z1(dilate_z1(f, r), s).coeffs, dilate_z1(f, r * s).coeffs,
                                       rtol=1e-14, atol=1e-15)

    def test_diagonal_round_trip(self):
        for _ in range(10):
            diag = self.rng.uniform(-1, 1, size=int(self.rng.integers(1, 9)))
            np.testing.assert_array_equal(diagonal_extract(embed_diagonal(diag)).real, diag)


class TestDegree(unittest.TestCase):
    """bidegree, trim, depends_on."""

    def test_trim_drops_zero_slices(self):
        f = pad_to_box(parse_polynomial("1 + z2"), (4, 4))
        self.assertEqual(bidegree(f), (0, 1))
        self.assertEqual(trim(f).box, (0, 1))

    def test_depends_on(self):
        self.assertEqual(depends_on(parse_polynomial("1 - z1")), (True, False))
        self.assertEqual(depends_on(parse_polynomial("1 - z2")), (False, True))
        self.assertEqual(depends_on(parse_polynomial("1 - z1*z2")), (True, True))
        self.assertEqual(depends_on(constant(3.0)), (False, False))

    def test_coefficient_slice(self):
        f = parse_polynomial("1 - 0.5*z1^2 - 0.5*z2 + z1^2*z2")
        np.testing.assert_allclose(coefficient_slice(f, 2), [-0.5, 1.0])
        np.testing.assert_allclose(coefficient_slice(f, 1), [0.0, 0.0])
        np.testing.assert_allclose(coefficient_slice(f, 5), [0.0, 0.0])


class TestMobius(unittest.TestCase):
    """Precomposition with a disk automorphism in z2."""

    def test_branch_point_example(self):
        """1 + z1^2 z2 with a = 1/2 becomes 1 - z1^2/2 - z2/2 + z1^2 z2."""
        q = mobius_precompose(parse_polynomial("1 + z1^2*z2"), 0.5)
        expected = parse_polynomial("1 - 0.5*z1^2 - 0.5*z2 + z1^2*z2")
        self.assertLess(max_coefficient_gap(trim(q), expected), 1e-14)

    def test_rejects_boundary_parameter(self):
        with self.assertRaises(ParameterOutOfRange):
            mobius_precompose(parse_polynomial("1 + z1*z2"), 1.0)


class TestEvaluation(unittest.TestCase):
    """Point, grid and slice evaluation."""

    def test_evaluate(self):
        f = parse_polynomial("2 - z1 - z2")
        self.assertAlmostEqual(abs(evaluate(f, 1.0, 1.0)), 0.0)
        self.assertAlmostEqual(evaluate(f, 0.5j, 0.0), 2.0 - 0.5j)

    def test_grid_rows_follow_z1(self):
        f = parse_polynomial("z1 + 10*z2")
        grid = evaluate_grid(f, [0.0, 1.0], [0.0, 1.0, 2.0])
        np.testing.assert_allclose(grid, [[0, 10, 20], [1, 11, 21]])

    def test_slice_coefficients(self):
        f = parse_polynomial("1 - 0.5*z1^2 - 0.5*z2 + z1^2*z2")
        np.testing.assert_allclose(slice_coefficients(f, 0.5), [0.75, 0.0, 0.0])


if __name__ == "__main__":
    unittest.main()
