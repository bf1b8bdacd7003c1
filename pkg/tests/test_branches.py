#!/usr/bin/env python3
"""
tests/test_branches.py — Unit tests for shared_tools.branches

Coverage:
    1. Root helpers: sphere roots with lost degree, chordal metric
    2. singular_set(): branch points vs leading degenerations
    3. track_branches(): monodromy transposition, residuals, clearance errors,
       |h_j| < 1 over the unit disk, loop products against the enclosing loop
    4. Root matching ambiguity
    5. Hopf ratio, multiplicity and the branch exponent -1/2
    6. reflected_branches()

Run:
    python3 -m unittest tests.test_branches -v
"""

import sys
import unittest
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from shared_tools.branches import (
    _match,
    branch_exponent,
    chordal,
    circle_path,
    compose_permutations,
    hopf_ratio,
    multiplicity,
    multiplicity_bound,
    ray_path,
    reflected_branches,
    singular_set,
    track_branches,
    track_residual,
    z1_roots,
)
from shared_tools.lab_errors import DegenerateInput, MatchingAmbiguity, ParameterOutOfRange
from shared_tools.series_io import parse_polynomial

SIMPLE_BRANCH = "1 + z1^2*z2"
BRANCH_EXAMPLE = "1 - 0.5*z1^2 - 0.5*z2 + z1^2*z2"


class TestRootHelpers(unittest.TestCase):

    def test_lost_degree_gives_infinity(self):
        q = parse_polynomial(SIMPLE_BRANCH).coeffs
        roots = z1_roots(q, 0.0)
        self.assertEqual(roots.size, 2)
        self.assertTrue(np.all(np.isinf(roots.real)))

    def test_identically_zero_slice(self):
        q = parse_polynomial("z2 - z1*z2").coeffs
        with self.assertRaises(DegenerateInput):
            z1_roots(q, 0.0)

    def test_chordal(self):
        self.assertAlmostEqual(float(chordal(np.inf, np.inf)), 0.0)
        self.assertAlmostEqual(float(chordal(0.0, np.inf)), 1.0)
        self.assertAlmostEqual(float(chordal(1.0, -1.0)), 1.0)

    def test_paths(self):
        path = circle_path(0.5, 0.1, n=16)
        self.assertEqual(path.size, 17)
        self.assertEqual(path[0], path[-1])
        np.testing.assert_allclose(ray_path(0.0, 1.0, n=4), [0, 0.25, 0.5, 0.75, 1.0])


class TestSingularSet(unittest.TestCase):

    def test_simple_branch(self):
        singular = singular_set(parse_polynomial(SIMPLE_BRANCH))
        self.assertEqual(len(singular.points), 1)
        self.assertAlmostEqual(abs(singular.points[0].value), 0.0)
        self.assertEqual(singular.points[0].tag, "leading-degeneration")

    def test_branch_example(self):
        singular = singular_set(parse_polynomial(BRANCH_EXAMPLE))
        values = singular.values
        self.assertEqual(values.size, 2)
        self.assertLess(abs(values[0] - 0.5), 1e-8)
        self.assertLess(abs(values[1] - 2.0), 1e-8)
        self.assertEqual([pt.tag for pt in singular.points], ["leading-degeneration", "branch"])
        self.assertAlmostEqual(singular.distance(0.5 + 0.1j), 0.1)

    def test_linear_has_no_singular_points(self):
        self.assertEqual(singular_set(parse_polynomial("2 - z1 - z2")).points, [])

    def test_requires_z2(self):
        with self.assertRaises(DegenerateInput):
            singular_set(parse_polynomial("1 - z1"))


class TestContinuation(unittest.TestCase):

    def test_monodromy_is_transposition(self):
        p = parse_polynomial(SIMPLE_BRANCH)
        track = track_branches(p, circle_path(0.0, 0.1))
        self.assertTrue(track.closed)
        self.assertEqual(track.monodromy, (1, 0))
        self.assertLess(track_residual(p, track), 1e-8)
        self.assertEqual(track.to_dict()["monodromy"], [2, 1])

    def test_loop_away_from_branch_point(self):
        p = parse_polynomial(BRANCH_EXAMPLE)
        track = track_branches(p, circle_path(-0.4, 0.2))
        self.assertEqual(track.monodromy, (0, 1))

    def test_branches_stay_in_disk_over_disk(self):
        """p has no zeros on the bidisk, so |h_j(z2)| < 1 at every tracked node inside the unit disk."""
        p = parse_polynomial(BRANCH_EXAMPLE)
        for path in (circle_path(0.0, 0.7), circle_path(0.5, 0.3), ray_path(-0.9, 0.9j)):
            track = track_branches(p, path)
            inside = np.abs(track.nodes) < 1.0
            self.assertTrue(np.any(inside))
            self.assertLess(float(np.max(np.abs(track.values[inside]))), 1.0)

    def test_loop_products_match_enclosing_loop(self):
        """Loops around 0.5 and 2 from a shared base point compose to the loop around both."""
        p = parse_polynomial(BRANCH_EXAMPLE)
        base = 1.25 - 1.0j

        def keyhole(center, radius, n=128):
            start = center - 1j * radius
            angles = 2.0 * np.pi * np.arange(n + 1) / n - np.pi / 2.0
            ring = center + radius * np.exp(1j * angles)
            ring[-1] = start
            return np.concatenate([ray_path(base, start, 32), ring[1:], ray_path(start, base, 32)[1:]])

        around_half = track_branches(p, keyhole(0.5, 0.3)).monodromy
        around_two = track_branches(p, keyhole(2.0, 0.3)).monodromy
        enclosing = track_branches(p, keyhole(1.25, 1.0, n=256)).monodromy
        self.assertEqual(around_half, (1, 0))
        self.assertEqual(around_two, (1, 0))
        self.assertEqual(compose_permutations(around_half, around_two), enclosing)
        self.assertEqual(enclosing, (0, 1))

    def test_open_path_has_no_monodromy(self):
        track = track_branches(parse_polynomial(SIMPLE_BRANCH), ray_path(0.5, 0.9j))
        self.assertFalse(track.closed)
        self.assertEqual(track.values.shape[1], 2)

    def test_clearance(self):
        with self.assertRaises(ParameterOutOfRange):
            track_branches(parse_polynomial(SIMPLE_BRANCH), circle_path(0.0, 1e-4))

    def test_compose(self):
        self.assertEqual(compose_permutations((1, 0), (1, 0)), (0, 1))
        self.assertEqual(compose_permutations((1, 2, 0), (0, 2, 1)), (2, 1, 0))

    def test_matching_ambiguity(self):
        previous = np.array([1.0, -1.0], dtype=complex)
        current = np.array([1j, -1j])
        with self.assertRaises(MatchingAmbiguity):
            _match(previous, current, 1e-9)


class TestHopfAndExponents(unittest.TestCase):

    def test_hopf_ratio_simple_branch(self):
        """h = +-sqrt(-z2), so the ratio is 1 / (1 + |z2|) > 1/2."""
        report = hopf_ratio(parse_polynomial(SIMPLE_BRANCH), 256, seed=0)
        self.assertGreater(report["min_ratio"], 0.5)
        self.assertLess(report["max_abs_h"], 1.0)
        self.assertEqual(report["multiplicity"], 1)
        self.assertEqual(report["z2_degree"], 1)
        self.assertGreater(report["samples_used"], 200)

    def test_hopf_ratio_is_seeded(self):
        p = parse_polynomial(BRANCH_EXAMPLE)
        self.assertEqual(hopf_ratio(p, 64, seed=5), hopf_ratio(p, 64, seed=5))

    def test_multiplicity(self):
        p = parse_polynomial(SIMPLE_BRANCH)
        self.assertEqual(multiplicity(p, 0.5), 1)
        self.assertEqual(multiplicity_bound(p, [0.1, 0.5j, -0.9]), 1)

    def test_exponent_at_branch_point(self):
        report = branch_exponent(parse_polynomial(SIMPLE_BRANCH), 0.0)
        self.assertAlmostEqual(report["slope"], -0.5, delta=0.05)
        self.assertEqual(report["note"], "blowup")
        self.assertEqual(len(report["derivatives"]), 5)

    def test_no_blowup_at_regular_point(self):
        report = branch_exponent(parse_polynomial(SIMPLE_BRANCH), 0.5)
        self.assertEqual(report["note"], "no_blowup")


class TestReflectedBranches(unittest.TestCase):

    def test_simple_branch(self):
        samples = 0.5 * np.exp(1j * np.linspace(0.0, 6.0, 7))
        report = reflected_branches(parse_polynomial(SIMPLE_BRANCH), samples)
        self.assertEqual(report["checked"], 7)
        self.assertLess(report["max_relation_residual"], 1e-10)
        self.assertTrue(report["inside_disk"])
        self.assertAlmostEqual(report["max_abs_b"], 0.25)


if __name__ == "__main__":
    unittest.main()
