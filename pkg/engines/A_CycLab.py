#!/usr/bin/env python3
"""
A_CycLab.py

Command-line driver for the CycLab library: norms, optimal approximants,
radial dilations, torus zero sets, branch functions, cyclicity verdicts,
Forelli-Rudin integrals and the acceptance suite.

Usage:
    python3 engines/A_CycLab.py norm -p "z1*z2" --alpha 1 1
    python3 engines/A_CycLab.py approx -p "1 - z1*z2" --alpha 0 0 --nmax 64 --shape diagonal
    python3 engines/A_CycLab.py classify -p "1 - z1*z2" --alpha -2 2
    python3 engines/A_CycLab.py classify -p "2 - z1 - z2" --lattice --out results/region.csv
    python3 engines/A_CycLab.py suite --only 1,2,9

Exit codes: 0 success, 1 library error, 2 parse/configuration error,
3 acceptance failure in `suite`.
"""

# --- Script Version ---
CYCLAB_VERSION = "1.0.0"

# ----------------------------------------------------------- #
#                           Libraries                         #
# ----------------------------------------------------------- #
import argparse
import json
import logging
import math
import os
import sys
import time
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from shared_tools.shared_utils import (
    initialize_performance_data,
    json_default,
    load_parameters_from_file,
    log_performance_data,
    setup_logger,
    write_csv_atomic,
    write_json_atomic,
)
from shared_tools.path_utils import resolve_paths_in_params
from shared_tools.lab_config import (
    EXPECTED_LAB_PARAMETERS,
    ExperimentConfig,
    _param_bool,
    _param_float,
    _param_float_list,
    _param_int,
    threads_from_env,
)
from shared_tools.lab_errors import CycLabError, DegenerateInput, ExpressionSyntaxError, Inconclusive
from shared_tools.series_core import BivariateSeries, depends_on, trim
from shared_tools.series_io import format_polynomial, parse_polynomial, read_series_file
from shared_tools.spaces import (
    WeightPair,
    coeff_norm_sq,
    derivative_membership,
    dirichlet_integral_split,
    forelli_rudin_normalized,
)
from shared_tools.approximants import SHAPES, decay_fit, distance_sequence, natural_shape
from shared_tools.dilation_lab import boundedness_verdict, derivative_sweep, one_var_quotient_sweep, two_var_sweep
from shared_tools.zerosets import offtorus_containment, sample_offtorus_zeros, zeroset_report
from shared_tools.branches import (
    SingularSet,
    branch_exponent,
    circle_path,
    hopf_ratio,
    reflected_branches,
    singular_set,
    track_branches,
)
from shared_tools.classifier import classify, classify_lattice, cross_validate
from engines.B_Suite import format_table, parse_only, run_suite

# ----------------------------------------------------------- #
#                        Configuration                        #
# ----------------------------------------------------------- #

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
PATHS_FILE = os.path.join(ROOT, 'parameters', 'paths.txt')
LABPAR_FILE = os.path.join(ROOT, 'parameters', 'labpar.txt')

COMMANDS = ("norm", "approx", "dilate", "zeroset", "branches", "classify", "fr-integral", "suite")
TABLE_COMMANDS = ("approx", "dilate", "fr-integral", "suite")

CommandResult = Tuple[Dict[str, Any], Optional[pd.DataFrame]]


# ----------------------------------------------------------- #
#                           Parser                            #
# ----------------------------------------------------------- #

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", type=str, default=None, help="extra key = value parameter file, loaded last")
    common.add_argument("--out", type=str, default=None, help="artifact path (stdout when omitted)")
    common.add_argument("--format", choices=("json", "csv"), default=None, help="artifact format")
    common.add_argument("--seed", type=int, default=None, help="seed for every quasi-random sample")
    common.add_argument("--threads", type=int, default=None, help="worker threads (CYCLAB_THREADS wins)")
    common.add_argument("--debug", action="store_true", help="DEBUG logging")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("-p", "--poly", type=str, default=None, help='polynomial expression, e.g. "2 - z1 - z2"')
    source.add_argument("--input", type=str, default=None, help="series JSON file ({'coeffs': ...})")

    weights = argparse.ArgumentParser(add_help=False)
    weights.add_argument("--alpha", type=float, nargs=2, metavar=("ALPHA1", "ALPHA2"), default=None)

    parser = argparse.ArgumentParser(prog="cyclab", description="Anisotropic Dirichlet space laboratory")
    subparsers = parser.add_subparsers(dest="command", required=True)

    norm = subparsers.add_parser("norm", parents=[common, source, weights], help="coefficient norm (and integral form)")
    norm.add_argument("--integral", action="store_true", help="also report the Dirichlet integral split")
    norm.add_argument("--derivative", type=int, default=None, metavar="K", help="compare d^K/dz1^K f in the shifted space")

    approx = subparsers.add_parser("approx", parents=[common, source, weights], help="distance sequence dist^2_N")
    approx.add_argument("--nmax", type=int, default=None)
    approx.add_argument("--shape", choices=SHAPES, default=None)
    approx.add_argument("--fit", action="store_true", help="add the decay regime fit")

    dilate = subparsers.add_parser("dilate", parents=[common, source, weights], help="norms of p/p_r along an r grid")
    dilate.add_argument("--r-grid", type=str, default=None, help="comma-separated radii in (0, 1)")
    dilate.add_argument("--box", type=int, default=None)
    dilate.add_argument("--derivative", type=int, default=None, metavar="K")

    zeroset = subparsers.add_parser("zeroset", parents=[common, source], help="torus zero set and stability")
    zeroset.add_argument("--grid-n", type=int, default=None)
    zeroset.add_argument("--irreducible", action="store_true", help="assert irreducibility")
    zeroset.add_argument("--offtorus", type=int, default=0, metavar="N", help="sample N off-torus zeros")

    branches = subparsers.add_parser("branches", parents=[common, source], help="branch functions h_j")
    branches.add_argument("--loop", type=float, nargs=3, action="append", metavar=("RE", "IM", "RADIUS"),
                          help="track a circle around RE + i IM (repeatable)")
    branches.add_argument("--exponent", type=float, nargs=2, action="append", metavar=("RE", "IM"),
                          help="fit the derivative blow-up at RE + i IM (repeatable)")
    branches.add_argument("--sample-n", type=int, default=None, help="Hopf ratio sample count")

    classify_cmd = subparsers.add_parser("classify", parents=[common, source, weights], help="cyclicity verdict")
    classify_cmd.add_argument("--lattice", action="store_true", help="verdicts over the alpha lattice (CSV)")
    classify_cmd.add_argument("--factor", type=str, action="append", default=None, help="factor expression (repeatable)")
    classify_cmd.add_argument("--irreducible", action="store_true", help="assert irreducibility")
    classify_cmd.add_argument("--cross-validate", action="store_true", help="compare with the distance decay")
    classify_cmd.add_argument("--nmax", type=int, default=None)

    fr = subparsers.add_parser("fr-integral", parents=[common], help="Forelli-Rudin integral and its growth")
    fr.add_argument("--a", type=float, required=True)
    fr.add_argument("--b", type=float, required=True)
    fr.add_argument("--w-mod", type=float, nargs="+", required=True)

    suite = subparsers.add_parser("suite", parents=[common], help="acceptance corpus")
    suite.add_argument("--only", type=str, default=None, help="comma-separated criterion numbers")
    return parser


# ----------------------------------------------------------- #
#                       Input helpers                         #
# ----------------------------------------------------------- #

def load_lab_parameters(extra_file: Optional[str]) -> Dict[str, Any]:
    files = [PATHS_FILE, LABPAR_FILE] + ([extra_file] if extra_file else [])
    params = load_parameters_from_file(filepaths=files, expected_parameters=EXPECTED_LAB_PARAMETERS)
    params["_parameter_files"] = files
    return resolve_paths_in_params(params, ROOT, None)


def read_polynomial(args: argparse.Namespace) -> Tuple[BivariateSeries, str]:
    if getattr(args, "poly", None) and getattr(args, "input", None):
        raise ExpressionSyntaxError("give either -p/--poly or --input, not both")
    if getattr(args, "poly", None):
        return parse_polynomial(args.poly), "inline"
    if getattr(args, "input", None):
        return read_series_file(args.input), "json"
    raise ExpressionSyntaxError(f"'{args.command}' needs a polynomial (-p EXPR or --input FILE)")


def require_weights(args: argparse.Namespace) -> WeightPair:
    if args.alpha is None:
        raise ExpressionSyntaxError(f"'{args.command}' needs --alpha ALPHA1 ALPHA2")
    return WeightPair(args.alpha[0], args.alpha[1])


def _r_grid(args: argparse.Namespace, params: Dict[str, Any]) -> List[float]:
    if args.r_grid:
        try:
            return [float(v) for v in args.r_grid.split(",") if v.strip()]
        except ValueError as exc:
            raise ExpressionSyntaxError(f"bad --r-grid '{args.r_grid}': {exc}") from exc
    return _param_float_list(params, "DILATION_R_GRID")


# ----------------------------------------------------------- #
#                         Commands                            #
# ----------------------------------------------------------- #

def cmd_norm(args, params, config, p, logger) -> CommandResult:
    w = require_weights(args)
    payload: Dict[str, Any] = {"polynomial": format_polynomial(p), "alpha": w.as_list(),
                               "norm_sq": coeff_norm_sq(p, w)}
    if args.integral:
        payload["integral"] = dirichlet_integral_split(
            p, w,
            radial_n=_param_int(params, "QUAD_RADIAL_N"),
            angular_n=_param_int(params, "QUAD_ANGULAR_N"),
            rel_tol=_param_float(params, "QUAD_REL_TOL"),
            max_radial_n=_param_int(params, "QUAD_MAX_RADIAL_N"),
        )
    if args.derivative:
        payload["derivative"] = derivative_membership(p, w, args.derivative)
    logger.info(f"norm^2 of {payload['polynomial']} in D{tuple(w.as_list())}: {payload['norm_sq']!r}")
    return payload, None


def cmd_approx(args, params, config, p, logger) -> CommandResult:
    w = require_weights(args)
    shape = args.shape or natural_shape(p)
    key = "APPROX_NMAX_SQUARE" if shape == "square" else "APPROX_NMAX_DIAGONAL"
    n_max = args.nmax if args.nmax is not None else _param_int(params, key)
    config.resolution.update({"shape": shape, "n_max": n_max})
    seq = distance_sequence(p, w, n_max, shape, threads=config.threads)
    frame = seq.to_frame()
    payload: Dict[str, Any] = {"polynomial": format_polynomial(p), "alpha": w.as_list(), "shape": shape,
                               "sequence": frame.to_dict(orient="records")}
    if args.fit:
        try:
            payload["decay"] = decay_fit(
                seq,
                min_points=_param_int(params, "DECAY_MIN_POINTS"),
                r2_min=_param_float(params, "DECAY_R2_MIN"),
                plateau_diff_tol=_param_float(params, "PLATEAU_DIFF_TOL"),
                plateau_limit_min=_param_float(params, "PLATEAU_LIMIT_MIN"),
                vanishing_tol=_param_float(params, "VANISHING_TOL"),
            ).to_dict()
        except Inconclusive as exc:
            logger.warning(f"decay fit inconclusive: {exc}")
            payload["decay"] = {"regime": "inconclusive", "reason": str(exc), **exc.details}
    return payload, frame


def cmd_dilate(args, params, config, p, logger) -> CommandResult:
    w = require_weights(args)
    grid = _r_grid(args, params)
    config.resolution.update({"r_grid": grid, "box": args.box})
    sweep_kwargs = {
        "start_factor": _param_float(params, "DILATION_START_FACTOR"),
        "tail_tol": _param_float(params, "DILATION_TAIL_TOL"),
    }
    payload: Dict[str, Any] = {"polynomial": format_polynomial(p), "alpha": w.as_list()}
    if args.derivative:
        frame = derivative_sweep(p, w, grid, args.derivative, args.box,
                                 cap=_param_int(params, "DILATION_BOX_CAP"), **sweep_kwargs)
        payload["derivative"] = frame.to_dict(orient="records")
        return payload, frame

    uses_z1, uses_z2 = depends_on(p)
    if uses_z1 != uses_z2:
        coeffs = p.coeffs[:, 0] if uses_z1 else p.coeffs[0, :]
        alpha = w.alpha1 if uses_z1 else w.alpha2
        sweep = one_var_quotient_sweep(coeffs, alpha, grid, cap=_param_int(params, "DILATION_ONE_VAR_CAP"),
                                       threads=config.threads, **sweep_kwargs)
    else:
        sweep = two_var_sweep(p, w, grid, args.box, cap=_param_int(params, "DILATION_BOX_CAP"),
                              one_var_cap=_param_int(params, "DILATION_ONE_VAR_CAP"),
                              threads=config.threads, **sweep_kwargs)
    verdict = boundedness_verdict(sweep, bounded_factor=_param_float(params, "BOUNDED_FACTOR"),
                                  divergence_factor=_param_float(params, "DIVERGENCE_FACTOR"))
    frame = sweep.to_frame()
    payload.update({"path": sweep.path, "verdict": verdict, "records": frame.to_dict(orient="records")})
    logger.info(f"dilation sweep ({sweep.path}) over {len(grid)} radii: {verdict}")
    return payload, frame


def cmd_zeroset(args, params, config, p, logger) -> CommandResult:
    grid_n = args.grid_n or _param_int(params, "TORUS_GRID_N")
    config.resolution.update({"grid_n": grid_n})
    report = zeroset_report(p, grid_n, _param_int(params, "STABILITY_RADIAL_N"),
                            _param_int(params, "STABILITY_ANGULAR_N"),
                            irreducible=True if args.irreducible else None, seed=config.seed)
    if args.offtorus:
        zeros = sample_offtorus_zeros(p, args.offtorus, seed=config.seed)
        report["offtorus"] = {"samples": int(zeros.shape[0]), "contained": offtorus_containment(zeros)}
    return report, None


def _default_loop_radius(point: complex, singular: SingularSet) -> float:
    others = [abs(pt.value - point) for pt in singular.points if abs(pt.value - point) > 0]
    return min([0.1] + [0.4 * d for d in others])


def cmd_branches(args, params, config, p, logger) -> CommandResult:
    try:
        singular = singular_set(p, _param_float(params, "SINGULAR_CLUSTER_TOL"))
    except DegenerateInput as exc:
        logger.warning(f"{exc}; continuing with an empty singular set.")
        singular = SingularSet()
    track_kwargs = {
        "step_factor": _param_float(params, "PATH_STEP_FACTOR"),
        "max_step": _param_float(params, "PATH_MAX_STEP"),
        "min_clearance": _param_float(params, "PATH_MIN_CLEARANCE"),
        "ambiguity_tol": _param_float(params, "MATCH_AMBIGUITY_TOL"),
    }
    if args.loop:
        loops = [(complex(re, im), radius) for re, im, radius in args.loop]
    else:
        loops = [(pt.value, _default_loop_radius(pt.value, singular))
                 for pt in singular.points if abs(pt.value) < 1.0]
    tracks = []
    for center, radius in loops:
        track = track_branches(p, circle_path(center, radius), singular=singular, **track_kwargs)
        tracks.append({"center": [center.real, center.imag], "radius": radius, **track.to_dict()})
        logger.info(f"loop around {center} (radius {radius}): monodromy {track.monodromy}")

    points = [complex(re, im) for re, im in args.exponent] if args.exponent else \
        [pt.value for pt in singular.points if abs(pt.value) < 1.0]
    radii = _param_float_list(params, "EXPONENT_RADII")
    exponents = [branch_exponent(p, a, radii, step_factor=_param_float(params, "EXPONENT_STEP_FACTOR"),
                                 no_blowup_slope=_param_float(params, "NO_BLOWUP_SLOPE")) for a in points]

    sample_n = args.sample_n or _param_int(params, "HOPF_SAMPLE_N")
    config.resolution.update({"hopf_sample_n": sample_n, "exponent_radii": radii})
    hopf = hopf_ratio(p, sample_n, seed=config.seed, exclusion=_param_float(params, "HOPF_EXCLUSION"),
                      singular=singular)
    samples = np.linspace(0.05, 0.95, 19) * np.exp(1j * np.linspace(0.0, 2.0 * math.pi, 19, endpoint=False))
    payload = {
        "polynomial": format_polynomial(p),
        "singular_set": singular.to_dict()["points"],
        "tracks": tracks,
        "exponents": exponents,
        "hopf": hopf,
        "reflected": reflected_branches(p, samples),
    }
    return payload, None


def cmd_classify(args, params, config, p, logger) -> CommandResult:
    assertions: Dict[str, Any] = {}
    if args.irreducible:
        assertions["irreducible"] = True
    if args.factor:
        assertions["factors"] = [parse_polynomial(text) for text in args.factor]
    analysis = {
        "grid_n": _param_int(params, "TORUS_GRID_N"),
        "radial_n": _param_int(params, "STABILITY_RADIAL_N"),
        "angular_n": _param_int(params, "STABILITY_ANGULAR_N"),
        "seed": config.seed,
    }
    if args.lattice:
        axis = np.linspace(_param_float(params, "LATTICE_MIN"), _param_float(params, "LATTICE_MAX"),
                           _param_int(params, "LATTICE_N"))
        config.resolution.update({"lattice": [float(a) for a in axis]})
        frame = classify_lattice(p, axis, axis, assertions, threads=config.threads, **analysis)
        return {"polynomial": format_polynomial(p), "lattice": frame.to_dict(orient="records")}, frame

    w = require_weights(args)
    verdict = classify(p, w, assertions, **analysis)
    if args.cross_validate:
        verdict.cross_check = cross_validate(p, w, args.nmax, verdict=verdict, threads=config.threads)
    logger.info(f"{format_polynomial(p)} in D{tuple(w.as_list())}: {verdict.verdict} ({verdict.rule})")
    return verdict.to_dict(), None


def cmd_fr_integral(args, params, config, p, logger) -> CommandResult:
    cap = _param_float(params, "FR_WMOD_CAP")
    rows = [forelli_rudin_normalized(args.a, args.b, w_mod, w_mod_cap=cap) for w_mod in args.w_mod]
    frame = pd.DataFrame(rows, columns=["a", "b", "w_mod", "integral", "regime", "growth", "ratio"])
    return {"a": args.a, "b": args.b, "values": rows}, frame


def cmd_suite(args, params, config, p, logger) -> CommandResult:
    only = parse_only(args.only)
    config.resolution.update({"criteria": only})
    frame = run_suite(only, seed=config.seed, threads=config.threads, log=logger)
    print(format_table(frame), file=sys.stderr)
    payload = {"passed": bool(frame["passed"].all()), "criteria": frame.to_dict(orient="records")}
    return payload, frame


HANDLERS = {
    "norm": cmd_norm,
    "approx": cmd_approx,
    "dilate": cmd_dilate,
    "zeroset": cmd_zeroset,
    "branches": cmd_branches,
    "classify": cmd_classify,
    "fr-integral": cmd_fr_integral,
    "suite": cmd_suite,
}


# ----------------------------------------------------------- #
#                          Output                             #
# ----------------------------------------------------------- #

def emit(payload: Dict[str, Any], frame: Optional[pd.DataFrame], fmt: str, out: Optional[str],
         config: ExperimentConfig, logger: logging.Logger) -> None:
    """Write the artifact (or print it) with the resolved configuration attached."""
    config_dict = config.to_dict()
    if fmt == "csv":
        table = frame if frame is not None else pd.json_normalize(payload)
        header = "config: " + json.dumps(config_dict, default=json_default, sort_keys=True)
        if out:
            write_csv_atomic(out, table, header_comment=header)
            logger.info(f"CSV artifact written to {out}")
        else:
            sys.stdout.write(f"# {header}\n")
            table.to_csv(sys.stdout, index=False, lineterminator="\n", float_format=lambda x: repr(float(x)))
        return
    document = dict(payload, config=config_dict)
    if out:
        write_json_atomic(out, document)
        logger.info(f"JSON artifact written to {out}")
    else:
        sys.stdout.write(json.dumps(document, indent=2, default=json_default, allow_nan=True) + "\n")


# ----------------------------------------------------------- #
#                      Main Execution                         #
# ----------------------------------------------------------- #

def main(argv: Optional[List[str]] = None) -> int:
    overall_start_time = time.time()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2

    try:
        params = load_lab_parameters(args.params)
    except (FileNotFoundError, ValueError, OSError) as param_err:
        print(f"CRITICAL: Could not load parameters. Exiting. Error: {param_err}", file=sys.stderr)
        return 2

    debug = args.debug or _param_bool(params, "debug_mode")
    level = logging.DEBUG if debug else logging.INFO
    logger = setup_logger("CycLab", params.get("LOG_FILE"), params.get("PROGRESS_JSON_FILE"), level)
    setup_logger("shared_tools", params.get("LOG_FILE"), None, level)

    threads = threads_from_env(args.threads if args.threads is not None else _param_int(params, "THREADS"))
    seed = args.seed if args.seed is not None else _param_int(params, "SEED")
    configured_format = str(params.get("OUTPUT_FORMAT", "auto")).lower()
    if args.format:
        fmt = args.format
    elif configured_format in ("json", "csv"):
        fmt = configured_format
    else:
        fmt = "csv" if args.command in TABLE_COMMANDS or getattr(args, "lattice", False) else "json"

    perf_data = initialize_performance_data(CYCLAB_VERSION, command=args.command)
    perf_data["threads"] = threads
    perf_data["param_load_duration_s"] = time.time() - overall_start_time
    logger.info(f"CycLab v{CYCLAB_VERSION}: '{args.command}' started.",
                extra={'web_data': {"cyclab_status": "Running", "cyclab_command": args.command,
                                    "cyclab_start": datetime.now().strftime('%Y-%m-%d %H:%M:%S'),
                                    "cyclab_end": "N/A"}})

    exit_code = 1
    compute_start = time.time()
    try:
        p: Optional[BivariateSeries] = None
        source = None
        text = None
        if args.command not in ("fr-integral", "suite"):
            p, source = read_polynomial(args)
            p = trim(p, tol=0.0)
            text = format_polynomial(p)
        config = ExperimentConfig(
            command=args.command,
            polynomial=text,
            polynomial_source=source or "none",
            weights=[list(args.alpha)] if getattr(args, "alpha", None) else [],
            output=args.out,
            output_format=fmt,
            seed=seed,
            threads=threads,
            parameter_files=list(params.get("_parameter_files", [])),
        )
        payload, frame = HANDLERS[args.command](args, params, config, p, logger)
        emit(payload, frame, fmt, args.out, config, logger)
        exit_code = 0
        if args.command == "suite" and not payload.get("passed", False):
            logger.error("Acceptance suite reported failures.")
            exit_code = 3
    except ExpressionSyntaxError as exc:
        logger.error(f"Input error: {exc}")
        exit_code = 2
    except CycLabError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        exit_code = 1
    except ValueError as exc:
        if args.command == "suite":
            logger.error(f"Configuration error: {exc}")
            exit_code = 2
        else:
            logger.critical(f"An unhandled exception occurred: {exc}", exc_info=True)
            exit_code = 1
    except Exception as exc:
        logger.critical(f"An unhandled exception occurred: {exc}", exc_info=True)
        exit_code = 1
    finally:
        perf_data["compute_duration_s"] = time.time() - compute_start
        perf_data["overall_script_duration_s"] = time.time() - overall_start_time
        perf_data["exit_code"] = exit_code
        log_performance_data(perf_data, params, logger)
        status = {0: "Completed", 1: "Failed", 2: "Failed: Input", 3: "Failed: Acceptance"}[exit_code]
        logger.info(f"Execution complete (exit code {exit_code}).",
                    extra={'web_data': {"cyclab_status": status,
                                        "cyclab_end": datetime.now().strftime('%Y-%m-%d %H:%M:%S')}})
    return exit_code


if __name__ == "__main__":
    raise SystemExit(main())
