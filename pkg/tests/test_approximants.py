#!/usr/bin/env python3
"""
tests/test_approximants.py — Unit tests for shared_tools.approximants

Coverage:
    1. Basis shapes: nesting, shell order, natural_shape()
    2. Hardy closed form dist^2_n(1 - z) = 1 / (n + 2)
    3. Diagonal identity: 1 - z1 z2 in D_(a1, a2) vs 1 - z in D_(a1 + a2)
    4. solve_optimal() optimality and monotone distance sequences
    5. decay_fit() regimes: power_law, plateau (literal and extrapolated), vanishing
    6. Orthogonal complement: dimension and the 2 - z1 - z2 recurrence
    7. Gram solve vs direct minimisation, invariance under p -> c p, square vs diagonal
       basis for diagonal p, the point-evaluation lower bound at an interior zero

Run:
    python3 -m unittest tests.test_approximants -v
"""

import sys
import unittest
from pathlib import Path

import numpy as np
from scipy import optimize

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from shared_tools.approximants import (
    DistanceSequence,
    approximant_series,
    basis_shifts,
    build_gram,
    decay_fit,
    distance_sequence,
    distance_squared,
    natural_shape,
    one_var_distance_sequence,
    orthocomplement_basis,
    orthocomplement_recurrence_check,
    orthogonality_residual,
    solve_optimal,
)
from shared_tools.lab_errors import Inconclusive, ParameterOutOfRange
from shared_tools.series_core import scale
from shared_tools.series_io import parse_polynomial
from shared_tools.spaces import WeightPair


class TestBasisShapes(unittest.TestCase):

    def test_square_is_shell_ordered(self):
        """Every leading (n+1)^2 block is the square box of degree n."""
        shifts = basis_shifts("square", 3)
        self.assertEqual(shifts.shape, (16, 2))
        for n in range(4):
            block = shifts[:(n + 1) ** 2]
            self.assertLessEqual(int(block.max()), n)

    def test_one_dimensional_shapes(self):
        np.testing.assert_array_equal(basis_shifts("diagonal", 2), [[0, 0], [1, 1], [2, 2]])
        np.testing.assert_array_equal(basis_shifts("z2", 1), [[0, 0], [0, 1]])
        with self.assertRaises(ParameterOutOfRange):
            basis_shifts("triangle", 2)

    def test_natural_shape(self):
        self.assertEqual(natural_shape(parse_polynomial("1 - z1")), "z1")
        self.assertEqual(natural_shape(parse_polynomial("3 - z2^2")), "z2")
        self.assertEqual(natural_shape(parse_polynomial("1 - z1*z2")), "diagonal")
        self.assertEqual(natural_shape(parse_polynomial("2 - z1 - z2")), "square")


class TestClosedForms(unittest.TestCase):
    """Distances with known exact values."""

    def test_hardy_closed_form(self):
        seq = one_var_distance_sequence([1.0, -1.0], 0.0, 30)
        expected = 1.0 / (np.arange(31) + 2.0)
        self.assertAlmostEqual(seq.value_at(0), 0.5, places=12)
        self.assertLess(float(np.max(np.abs(seq.dist_sq - expected))), 1e-9)

    def test_diagonal_identity(self):
        p = parse_polynomial("1 - z1*z2")
        for a1, a2 in [(0, 0), (-2, 2), (0.5, 0.5), (1, 1)]:
            with self.subTest(alpha=(a1, a2)):
                two = distance_sequence(p, WeightPair(a1, a2), 16, "diagonal")
                one = one_var_distance_sequence([1.0, -1.0], a1 + a2, 16)
                self.assertLess(float(np.max(np.abs(two.dist_sq - one.dist_sq))), 1e-9)

    def test_constant_polynomial_is_exact(self):
        seq = distance_sequence(parse_polynomial("2"), WeightPair(1, 1), 3, "square")
        self.assertLess(float(np.max(seq.dist_sq)), 1e-20)


class TestOptimalSolve(unittest.TestCase):

    def test_normal_equations_hold(self):
        p = parse_polynomial("2 - z1 - z2")
        w = WeightPair(0.5, 2)
        system = build_gram(p, (3, 3), w)
        q, dist = solve_optimal(p, (3, 3), w)
        coefficients = q.coeffs[system.shifts[:, 0], system.shifts[:, 1]]
        self.assertLess(orthogonality_residual(system, coefficients), 1e-10)
        self.assertGreater(dist, 0.0)
        self.assertLess(dist, 1.0)

    def test_box_matches_sequence(self):
        p = parse_polynomial("2 - z1 - z2")
        w = WeightPair(0, 0)
        seq = distance_sequence(p, w, 4, "square")
        _, dist = solve_optimal(p, (4, 4), w)
        self.assertAlmostEqual(seq.value_at(4), dist, places=10)

    def test_sequence_is_nonincreasing(self):
        seq = distance_sequence(parse_polynomial("2 - z1 - z2"), WeightPair(0, 0), 8, "square")
        self.assertTrue(np.all(np.diff(seq.dist_sq) <= 1e-12))
        self.assertEqual(list(seq.to_frame().columns), ["N", "dist_sq"])

    def test_threads_do_not_change_results(self):
        p = parse_polynomial("1 - z1*z2")
        serial = distance_sequence(p, WeightPair(0, 0), 20, "diagonal", threads=1)
        parallel = distance_sequence(p, WeightPair(0, 0), 20, "diagonal", threads=3)
        np.testing.assert_array_equal(serial.dist_sq, parallel.dist_sq)


class TestOptimalityChecks(unittest.TestCase):
    """The Gram solve against direct minimisation, scaling, and bounds it must respect."""

    def test_gram_solve_matches_direct_minimisation(self):
        p = parse_polynomial("2 - z1 - z2")
        w = WeightPair(0.5, 2)
        for box in ((0, 0), (1, 0)):
            shifts = build_gram(p, box, w).shifts
            k = shifts.shape[0]

            def objective(x):
                return distance_squared(p, approximant_series(shifts, x[:k] + 1j * x[k:]), w)

            start = optimize.brute(objective, [(-1.0, 1.0)] * (2 * k), Ns=9, finish=None)
            polished = optimize.minimize(objective, np.atleast_1d(start), method="BFGS", options={"gtol": 1e-12})
            direct = polished.x[:k] + 1j * polished.x[k:]
            q, dist = solve_optimal(p, box, w)
            with self.subTest(box=box):
                np.testing.assert_allclose(q.coeffs[shifts[:, 0], shifts[:, 1]], direct, rtol=0, atol=1e-4)
                self.assertLessEqual(dist, polished.fun + 1e-12)

    def test_distance_ignores_scaling_of_p(self):
        p = parse_polynomial("2 - z1 - z2 + 0.5*z1*z2")
        w = WeightPair(0.5, -1)
        base = distance_sequence(p, w, 5, "square")
        for c in (3 - 4j, 0.01, 250.0):
            with self.subTest(c=c):
                scaled = distance_sequence(scale(p, c), w, 5, "square")
                np.testing.assert_allclose(scaled.dist_sq, base.dist_sq, rtol=1e-12)

    def test_square_basis_adds_nothing_for_diagonal_p(self):
        p = parse_polynomial("1 - z1*z2")
        for a1, a2 in [(0, 0), (0.5, -1), (1, 1)]:
            with self.subTest(alpha=(a1, a2)):
                square = distance_sequence(p, WeightPair(a1, a2), 6, "square")
                diagonal = distance_sequence(p, WeightPair(a1, a2), 6, "diagonal")
                np.testing.assert_allclose(square.dist_sq, diagonal.dist_sq, rtol=0, atol=1e-12)

    def test_interior_zero_keeps_distance_away_from_zero(self):
        """|p q - 1| = 1 where p vanishes, so dist^2 >= 1 / K(z, z) at z1 = z2 = 1/sqrt(2)."""
        p = parse_polynomial("1 - 2*z1*z2")
        powers = 0.5 ** np.arange(400)
        for a1, a2 in [(0, 0), (-1, 0.5), (1, 1)]:
            k1 = float(np.sum(powers / (np.arange(400) + 1.0) ** a1))
            k2 = float(np.sum(powers / (np.arange(400) + 1.0) ** a2))
            bound = 1.0 / (k1 * k2)
            with self.subTest(alpha=(a1, a2)):
                for shape, n in (("diagonal", 24), ("square", 5)):
                    seq = distance_sequence(p, WeightPair(a1, a2), n, shape)
                    self.assertGreaterEqual(float(seq.dist_sq.min()), bound * (1.0 - 1e-10))


class TestDecayFit(unittest.TestCase):
    """Regime classification on synthetic and computed sequences."""

    @staticmethod
    def _sequence(values):
        values = np.asarray(values, dtype=float)
        return DistanceSequence(ns=np.arange(values.size), dist_sq=values)

    def test_power_law(self):
        n = np.arange(200)
        fit = decay_fit(self._sequence(1.0 / (n + 2.0)))
        self.assertEqual(fit.regime, "power_law")
        self.assertAlmostEqual(fit.slope, -1.0, delta=0.05)
        self.assertTrue(fit.decaying)

    def test_literal_plateau(self):
        fit = decay_fit(self._sequence(np.full(40, 0.3)))
        self.assertEqual(fit.regime, "plateau")
        self.assertEqual(fit.fits["plateau"]["method"], "literal")
        self.assertFalse(fit.decaying)

    def test_extrapolated_plateau(self):
        n = np.arange(200)
        fit = decay_fit(self._sequence(0.5 + 1.0 / (n + 1.0) ** 2))
        self.assertEqual(fit.regime, "plateau")
        self.assertAlmostEqual(fit.limit, 0.5, delta=1e-4)

    def test_vanishing(self):
        fit = decay_fit(self._sequence(np.full(20, 1e-14)))
        self.assertEqual(fit.regime, "vanishing")

    def test_too_short(self):
        with self.assertRaises(Inconclusive):
            decay_fit(self._sequence([0.5, 0.3, 0.2]))

    def test_hardy_sequence_decays(self):
        fit = decay_fit(one_var_distance_sequence([1.0, -1.0], 0.0, 200))
        self.assertEqual(fit.regime, "power_law")
        self.assertAlmostEqual(fit.slope, -1.0, delta=0.15)


class TestOrthocomplement(unittest.TestCase):

    def test_dimension(self):
        """Degree <= 8 polynomials modulo p * P_7: 81 - 64 = 17."""
        basis = orthocomplement_basis(parse_polynomial("2 - z1 - z2"), WeightPair(1, 1), 8)
        self.assertEqual(basis["dimension"], 17)
        self.assertEqual(len(basis["weighted_sums"]), 17)

    def test_recurrence(self):
        p = parse_polynomial("2 - z1 - z2")
        for w in (WeightPair(0, 0), WeightPair(1, 1), WeightPair(2, 0.5)):
            with self.subTest(w=w.as_list()):
                self.assertLess(orthocomplement_recurrence_check(p, w, 8), 1e-10)


if __name__ == "__main__":
    unittest.main()
