#!/usr/bin/env python3
"""
tests/test_zerosets.py — Unit tests for shared_tools.zerosets

Coverage:
    1. reflection_test() on proportional and generic polynomials
    2. torus_zero_search(): curve / finite / empty on the labelled corpus; a curve without the reflection witness raises ResolutionWarning
    3. face_zero_search() for one-variable polynomials
    4. stability_check(): zero-free, interior witness, side conditions, degree-dropping slices, z1 <-> z2 symmetry
    5. heuristic_irreducibility() verdicts and factor hints
    6. Off-torus sampling and zeroset_report()

Run:
    python3 -m unittest tests.test_zerosets -v
"""

import math
import sys
import unittest
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from shared_tools.lab_errors import DegenerateInput, DegenerateSlice, ResolutionWarning
from shared_tools.series_core import evaluate, swap_variables
from shared_tools.series_io import parse_polynomial
from shared_tools.zerosets import (
    face_zero_search,
    heuristic_irreducibility,
    offtorus_containment,
    reflection_test,
    sample_offtorus_zeros,
    stability_check,
    torus_zero_search,
    zeroset_report,
)

BRANCH_EXAMPLE = "1 - 0.5*z1^2 - 0.5*z2 + z1^2*z2"
CURVE_TIMES_FACE = "(1 - z1*z2)*(2 - z1)"


def _angle_distance(a, b):
    d = abs(a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


class TestReflection(unittest.TestCase):

    def test_diagonal_is_anti_proportional(self):
        report = reflection_test(parse_polynomial("1 - z1*z2"))
        self.assertTrue(report["proportional"])
        self.assertAlmostEqual(report["lambda"], -1.0)

    def test_branch_example_is_self_reflective(self):
        report = reflection_test(parse_polynomial(BRANCH_EXAMPLE))
        self.assertTrue(report["proportional"])
        self.assertAlmostEqual(report["lambda"], 1.0)

    def test_generic_polynomial(self):
        report = reflection_test(parse_polynomial("2 - z1 - z2"))
        self.assertFalse(report["proportional"])
        self.assertIsNone(report["lambda"])


class TestTorusZeroSearch(unittest.TestCase):
    """Labelled corpus."""

    def test_curve(self):
        for text in ("1 - z1*z2", BRANCH_EXAMPLE):
            with self.subTest(p=text):
                result = torus_zero_search(parse_polynomial(text), 128)
                self.assertEqual(result.tag, "curve")
                self.assertGreater(len(result.curve_points), 0)

    def test_finite_single_point(self):
        result = torus_zero_search(parse_polynomial("2 - z1 - z2"), 256)
        self.assertEqual(result.tag, "finite")
        self.assertEqual(len(result.points), 1)
        s, t = result.points[0]
        self.assertLess(_angle_distance(s, 0.0), 1e-6)
        self.assertLess(_angle_distance(t, 0.0), 1e-6)
        self.assertLess(result.residuals[0], 1e-8)

    def test_empty(self):
        self.assertEqual(torus_zero_search(parse_polynomial("3 - z1 - z2"), 128).tag, "empty")
        self.assertEqual(torus_zero_search(parse_polynomial("5"), 128).tag, "empty")

    def test_to_dict(self):
        out = torus_zero_search(parse_polynomial("1 - z1*z2"), 64).to_dict()
        self.assertEqual(out["class"], "curve")
        self.assertEqual(out["lambda"], [-1.0, 0.0])

    def test_curve_without_reflection_witness(self):
        """(1 - z1 z2)(2 - z1) vanishes on a curve but reflect(p) is not a multiple of p."""
        p = parse_polynomial(CURVE_TIMES_FACE)
        self.assertFalse(reflection_test(p)["proportional"])
        with self.assertRaises(ResolutionWarning) as ctx:
            torus_zero_search(p, 64)
        self.assertGreaterEqual(ctx.exception.details["minima"], 8)
        self.assertGreater(ctx.exception.details["reflection_residual"], 0.1)


class TestFaceZeroSearch(unittest.TestCase):

    def test_circle_zero(self):
        result = face_zero_search(parse_polynomial("1 - z1"))
        self.assertEqual(result.tag, "finite")
        self.assertEqual(len(result.points), 1)
        self.assertLess(_angle_distance(result.points[0][0], 0.0), 1e-9)

    def test_two_circle_zeros_in_z2(self):
        result = face_zero_search(parse_polynomial("1 - z2^2"))
        self.assertEqual(len(result.points), 2)
        self.assertLess(_angle_distance(result.points[1][0], math.pi), 1e-9)

    def test_no_circle_zero(self):
        self.assertEqual(face_zero_search(parse_polynomial("2 - z1")).tag, "empty")

    def test_rejects_two_variables(self):
        with self.assertRaises(DegenerateInput):
            face_zero_search(parse_polynomial("1 - z1*z2"))


class TestStability(unittest.TestCase):

    def test_boundary_zero_is_allowed(self):
        report = stability_check(parse_polynomial("2 - z1 - z2"), 32, 128)
        self.assertTrue(report.zero_free)
        self.assertGreater(report.min_root_modulus, 1.0)
        self.assertTrue(report.side_conditions["disk_times_torus"])
        self.assertTrue(report.side_conditions["torus_times_disk"])

    def test_interior_zero_witness(self):
        p = parse_polynomial("1 - 2*z1*z2")
        report = stability_check(p, 32, 128)
        self.assertEqual(report.verdict, "zero_found")
        a, b = report.witness
        self.assertLess(abs(a), 1.0)
        self.assertLess(abs(b), 1.0)
        self.assertLess(abs(evaluate(p, a, b)), 1e-8)

    def test_one_variable_in_z2(self):
        report = stability_check(parse_polynomial("1 - 0.5*z2"), 16, 64)
        self.assertTrue(report.zero_free)
        self.assertTrue(report.swapped)

    def test_constant(self):
        self.assertTrue(stability_check(parse_polynomial("4"), 8, 16).zero_free)
        self.assertFalse(stability_check(parse_polynomial("0"), 8, 16).zero_free)

    def test_degenerate_slices_are_reported(self):
        """The z1-leading coefficient of 2 + z1 z2 is z2, which vanishes on the r = 0 ring."""
        report = stability_check(parse_polynomial("2 + z1*z2"), 8, 16)
        self.assertTrue(report.zero_free)
        self.assertEqual(report.degenerate_slices, 16)
        self.assertIsInstance(report.slice_issue, DegenerateSlice)
        out = report.to_dict()
        self.assertEqual(out["degenerate_slice"]["count"], 16)
        self.assertEqual(out["degenerate_slice"]["swept"], "z2")
        self.assertEqual(out["degenerate_slice"]["slices"][0], [0.0, 0.0])

    def test_regular_sweep_has_no_slice_issue(self):
        report = stability_check(parse_polynomial("2 - z1 - z2"), 8, 16)
        self.assertEqual(report.degenerate_slices, 0)
        self.assertIsNone(report.slice_issue)
        self.assertNotIn("degenerate_slice", report.to_dict())

    def test_verdict_is_symmetric_in_the_variables(self):
        """Swapping z1 and z2 keeps the verdict and exchanges the side conditions."""
        for text in ("2 - z1 - z2", "1 - 2*z1*z2", BRANCH_EXAMPLE, "3 - z1 - 0.5*z2^2", "1 - 0.9*z1 - 0.3*z2^3"):
            p = parse_polynomial(text)
            direct = stability_check(p, 24, 96)
            swapped = stability_check(swap_variables(p), 24, 96)
            with self.subTest(p=text):
                self.assertEqual(direct.verdict, swapped.verdict)
                self.assertEqual(direct.side_conditions["disk_times_torus"], swapped.side_conditions["torus_times_disk"])
                self.assertEqual(direct.side_conditions["torus_times_disk"], swapped.side_conditions["disk_times_torus"])


class TestIrreducibility(unittest.TestCase):

    def test_linear_is_irreducible(self):
        self.assertEqual(heuristic_irreducibility(parse_polynomial("2 - z1 - z2"))["verdict"], "irreducible")

    def test_product_of_faces(self):
        result = heuristic_irreducibility(parse_polynomial("(1 - z1)*(1 - z2)"))
        self.assertEqual(result["verdict"], "reducible")
        self.assertEqual(result["factor_hint"], "1 - z1")

    def test_monomial_factor(self):
        result = heuristic_irreducibility(parse_polynomial("z1*z2 + z1^2"))
        self.assertEqual(result["verdict"], "reducible")
        self.assertEqual(result["factor_hint"], "z1")

    def test_one_variable_quadratic(self):
        result = heuristic_irreducibility(parse_polynomial("1 - z2^2"))
        self.assertEqual(result["verdict"], "reducible")

    def test_square_is_reducible(self):
        result = heuristic_irreducibility(parse_polynomial("(2 - z1 - z2)^2"), seed=3)
        self.assertEqual(result["verdict"], "reducible")


class TestOffTorusAndReport(unittest.TestCase):

    def test_containment_for_a_curve(self):
        zeros = sample_offtorus_zeros(parse_polynomial("1 - z1*z2"), 32, seed=1)
        self.assertEqual(zeros.shape, (32, 2))
        self.assertTrue(offtorus_containment(zeros))

    def test_containment_fails_for_finite_class(self):
        zeros = sample_offtorus_zeros(parse_polynomial("2 - z1 - z2"), 64, seed=1)
        self.assertFalse(offtorus_containment(zeros))

    def test_sampling_is_seeded(self):
        p = parse_polynomial(BRANCH_EXAMPLE)
        np.testing.assert_array_equal(sample_offtorus_zeros(p, 16, seed=7), sample_offtorus_zeros(p, 16, seed=7))

    def test_report_fields(self):
        report = zeroset_report(parse_polynomial("2 - z1 - z2"), 128, 16, 64)
        self.assertEqual(report["class"], "finite")
        self.assertEqual(report["stability"], "zero_free")
        self.assertEqual(report["irreducibility"]["verdict"], "irreducible")
        self.assertEqual(report["polynomial"], "2 - z2 - z1")

    def test_report_for_face(self):
        report = zeroset_report(parse_polynomial("1 - z2"), 64, 8, 32)
        self.assertEqual(report["face"], "z2")
        self.assertEqual(report["class"], "finite")

    def test_report_for_unresolved_torus(self):
        report = zeroset_report(parse_polynomial(CURVE_TIMES_FACE), 64, 8, 32)
        self.assertEqual(report["class"], "unresolved")
        self.assertEqual(report["points"], [])
        self.assertIn("minima", report["resolution_issue"])
        self.assertEqual(report["irreducibility"]["verdict"], "reducible")


if __name__ == "__main__":
    unittest.main()
