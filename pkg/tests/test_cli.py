#!/usr/bin/env python3
"""
tests/test_cli.py — End-to-end tests for engines/A_CycLab.py and engines/B_Suite.py

Coverage:
    1. JSON artifacts carry the payload and the resolved configuration
    2. CSV artifacts start with a '# config:' line and read back with pandas
    3. Series JSON input via --input
    4. Exit codes: 2 for input/usage errors, 1 for library errors, 0 for a passing suite
    5. The performance row appended after every run
    6. B_Suite.main() on its own; the dilation criterion reports both growth figures

Every run points LOG_FILE, PROGRESS_JSON_FILE and PERFORMANCE_FILE into a
temporary directory through --params, so the repository tree is untouched.
Loggers are configured once per process, so only the performance file
follows each test's directory.

Run:
    python3 -m unittest tests.test_cli -v
"""

import contextlib
import io
import json
import os
import sys
import tempfile
import unittest
from pathlib import Path

import pandas as pd

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from engines import A_CycLab, B_Suite
from shared_tools.series_io import parse_polynomial, series_to_json

_TMP = None


def setUpModule():
    global _TMP
    _TMP = tempfile.TemporaryDirectory()


def tearDownModule():
    _TMP.cleanup()


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp(dir=_TMP.name)
        self.params = os.path.join(self.tmp, "test_params.txt")
        with open(self.params, "w", encoding="utf-8") as handle:
            handle.write(f"LOG_FILE = {os.path.join(_TMP.name, 'cyclab.log')}\n")
            handle.write(f"PROGRESS_JSON_FILE = {os.path.join(self.tmp, 'progress.json')}\n")
            handle.write(f"PERFORMANCE_FILE = {os.path.join(self.tmp, 'performance.csv')}\n")

    def run_cli(self, *argv):
        stderr = io.StringIO()
        with contextlib.redirect_stderr(stderr):
            code = A_CycLab.main(list(argv) + ["--params", self.params])
        return code

    def out(self, name):
        return os.path.join(self.tmp, name)


class TestJsonArtifacts(CliTestCase):

    def test_norm(self):
        path = self.out("norm.json")
        self.assertEqual(self.run_cli("norm", "-p", "z1*z2", "--alpha", "1", "1", "--out", path), 0)
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
        self.assertAlmostEqual(document["norm_sq"], 4.0)
        self.assertEqual(document["alpha"], [1.0, 1.0])
        self.assertEqual(document["config"]["command"], "norm")
        self.assertEqual(document["config"]["polynomial_source"], "inline")
        self.assertEqual(document["config"]["output_format"], "json")
        self.assertIn(self.params, document["config"]["parameter_files"])

    def test_stdout_when_no_out(self):
        stdout = io.StringIO()
        with contextlib.redirect_stdout(stdout):
            code = self.run_cli("norm", "-p", "1 - z1", "--alpha", "0", "0")
        self.assertEqual(code, 0)
        self.assertAlmostEqual(json.loads(stdout.getvalue())["norm_sq"], 2.0)

    def test_series_json_input(self):
        source = self.out("p.json")
        with open(source, "w", encoding="utf-8") as handle:
            json.dump(series_to_json(parse_polynomial("1 - z1*z2")), handle)
        path = self.out("norm.json")
        self.assertEqual(self.run_cli("norm", "--input", source, "--alpha", "0", "0", "--out", path), 0)
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
        self.assertAlmostEqual(document["norm_sq"], 2.0)
        self.assertEqual(document["config"]["polynomial_source"], "json")

    def test_classify(self):
        path = self.out("verdict.json")
        self.assertEqual(self.run_cli("classify", "-p", "1 - z1*z2", "--alpha", "-2", "2", "--out", path), 0)
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
        self.assertEqual(document["verdict"], "cyclic")
        self.assertEqual(document["rule"], "theorem-case-1")

    def test_performance_row(self):
        self.run_cli("norm", "-p", "z1", "--alpha", "0", "0", "--out", self.out("n.json"))
        frame = pd.read_csv(self.out("performance.csv"))
        self.assertEqual(len(frame), 1)
        self.assertEqual(frame.loc[0, "command"], "norm")
        self.assertEqual(int(frame.loc[0, "exit_code"]), 0)
        self.assertGreaterEqual(float(frame.loc[0, "overall_script_duration_s"]), 0.0)


class TestCsvArtifacts(CliTestCase):

    def test_approx_table(self):
        path = self.out("approx.csv")
        code = self.run_cli("approx", "-p", "1 - z1*z2", "--alpha", "0", "0", "--nmax", "10", "--out", path)
        self.assertEqual(code, 0)
        with open(path, encoding="utf-8") as handle:
            first = handle.readline()
        self.assertTrue(first.startswith("# config: "))
        config = json.loads(first[len("# config: "):])
        self.assertEqual(config["resolution"]["shape"], "diagonal")
        frame = pd.read_csv(path, comment="#")
        self.assertEqual(list(frame.columns), ["N", "dist_sq"])
        self.assertEqual(len(frame), 11)
        self.assertAlmostEqual(frame.loc[0, "dist_sq"], 0.5)

    def test_fr_integral_table(self):
        path = self.out("fr.csv")
        self.assertEqual(self.run_cli("fr-integral", "--a", "0", "--b", "0", "--w-mod", "0.5", "0.9",
                                      "--out", path), 0)
        frame = pd.read_csv(path, comment="#")
        self.assertEqual(list(frame.columns), ["a", "b", "w_mod", "integral", "regime", "growth", "ratio"])
        self.assertEqual(len(frame), 2)

    def test_forced_json_for_a_table_command(self):
        path = self.out("approx.json")
        code = self.run_cli("approx", "-p", "1 - z1", "--alpha", "0", "0", "--nmax", "4",
                            "--format", "json", "--out", path)
        self.assertEqual(code, 0)
        with open(path, encoding="utf-8") as handle:
            self.assertEqual(len(json.load(handle)["sequence"]), 5)


class TestExitCodes(CliTestCase):

    def test_bad_expression(self):
        self.assertEqual(self.run_cli("norm", "-p", "z3 + 1", "--alpha", "0", "0"), 2)

    def test_missing_polynomial(self):
        self.assertEqual(self.run_cli("norm", "--alpha", "0", "0"), 2)

    def test_both_sources(self):
        self.assertEqual(self.run_cli("norm", "-p", "z1", "--input", self.out("p.json"), "--alpha", "0", "0"), 2)

    def test_missing_weights(self):
        self.assertEqual(self.run_cli("norm", "-p", "z1"), 2)

    def test_unknown_command(self):
        self.assertEqual(self.run_cli("integrate", "-p", "z1"), 2)

    def test_missing_parameter_file(self):
        stderr = io.StringIO()
        with contextlib.redirect_stderr(stderr):
            code = A_CycLab.main(["norm", "-p", "z1", "--alpha", "0", "0", "--params", self.out("none.txt")])
        self.assertEqual(code, 2)

    def test_library_error(self):
        self.assertEqual(self.run_cli("classify", "-p", "0", "--alpha", "0", "0"), 1)

    def test_radius_out_of_range(self):
        self.assertEqual(self.run_cli("dilate", "-p", "1 - z1", "--alpha", "1", "0", "--r-grid", "1.5"), 1)

    def test_failure_is_recorded(self):
        self.run_cli("classify", "-p", "0", "--alpha", "0", "0")
        frame = pd.read_csv(self.out("performance.csv"))
        self.assertEqual(int(frame.loc[0, "exit_code"]), 1)


class TestSuite(CliTestCase):

    def test_selected_criteria_pass(self):
        path = self.out("suite.csv")
        self.assertEqual(self.run_cli("suite", "--only", "2,9", "--out", path), 0)
        frame = pd.read_csv(path, comment="#")
        self.assertEqual(list(frame["criterion"]), [2, 9])
        self.assertTrue(frame["passed"].all())

    def test_unknown_criterion(self):
        self.assertEqual(self.run_cli("suite", "--only", "42"), 2)
        self.assertEqual(self.run_cli("suite", "--only", "x"), 2)

    def test_parse_only(self):
        self.assertEqual(B_Suite.parse_only("3, 1,3"), [1, 3])
        self.assertEqual(B_Suite.parse_only(None), sorted(B_Suite.CRITERIA))

    def test_suite_main(self):
        stdout = io.StringIO()
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(io.StringIO()):
            code = B_Suite.main(["--only", "2"])
        self.assertEqual(code, 0)
        self.assertIn("PASS", stdout.getvalue())

    def test_dilation_criterion_reads_the_dirichlet_part(self):
        ok, detail = B_Suite.criterion_dilation_boundedness(0, 1)
        self.assertTrue(ok)
        self.assertIn("Dirichlet growth", detail)
        self.assertIn("norm^2 growth", detail)


if __name__ == "__main__":
    unittest.main()
