"""Radial-dilation experiments: F_r = p / p(r z1, z2) swept as r -> 1."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import signal, special

from shared_tools.lab_errors import NotDiagonal, ParameterOutOfRange, ZeroConstantTerm
from shared_tools.series_core import (
    BivariateSeries,
    Box,
    diagonal_extract,
    dilate_z1,
    multiply,
    partial_derivative,
    reciprocal,
)
from shared_tools.shared_utils import map_parallel
from shared_tools.spaces import (
    WeightPair,
    coeff_norm_sq,
    diagonal_integral_norm_sq,
    gauss_legendre_unit_interval,
    integral_seminorm,
    one_var_integral_norm_sq,
    one_var_norm_sq,
)

logger = logging.getLogger(__name__)

DEFAULT_DILATION_PARAMS = {
    "DILATION_R_GRID": (0.5, 0.9, 0.99, 0.999),
    "DILATION_START_FACTOR": 16.0,
    "DILATION_TAIL_TOL": 0.01,
    "DILATION_ONE_VAR_CAP": 2 ** 16,
    "DILATION_BOX_CAP": 512,
    "BOUNDED_FACTOR": 10.0,
    "DIVERGENCE_FACTOR": 5.0,
    "MODEL_REL_TOL": 1e-8,
    "MODEL_MAX_NODES": 2048,
}


@dataclass
class DilationRecord:
    r: float
    norm_sq: float
    seminorm: float
    box: int
    tail: float
    reliable: bool
    dirichlet_sq: float = math.nan


@dataclass
class DilationSweep:
    records: List[DilationRecord]
    weights: Tuple[float, ...] = ()
    path: str = "general"
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def r_grid(self) -> List[float]:
        return [rec.r for rec in self.records]

    @property
    def norms(self) -> np.ndarray:
        return np.array([rec.norm_sq for rec in self.records], dtype=np.float64)

    def record_at(self, r: float) -> DilationRecord:
        for rec in self.records:
            if math.isclose(rec.r, r, rel_tol=0.0, abs_tol=1e-12):
                return rec
        raise KeyError(r)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([asdict(rec) for rec in self.records])
        if frame.empty:
            return pd.DataFrame(columns=["r", "norm_sq", "seminorm", "box", "reliable"])
        return frame[["r", "norm_sq", "seminorm", "box", "reliable"]]


def _check_radius(r: float) -> float:
    r = float(r)
    if not (0.0 < r < 1.0):
        raise ParameterOutOfRange(f"dilation radius must lie in (0, 1), got {r}")
    return r


# ----------------------------------------------------------- #
#                         Quotients                           #
# ----------------------------------------------------------- #

def dilation_quotient(p: BivariateSeries, r: float, box: Box) -> BivariateSeries:
    """Truncation of p(z1, z2) / p(r z1, z2) to the box."""
    r = _check_radius(r)
    return multiply(p, reciprocal(dilate_z1(p, r), box), box)


def one_var_quotient(coeffs: Sequence[complex], r: float, length: int) -> np.ndarray:
    """First length + 1 coefficients of P(z) / P(r z)."""
    r = _check_radius(r)
    P = np.asarray(coeffs, dtype=np.complex128).ravel()
    if P[0] == 0:
        raise ZeroConstantTerm("P(0) must be nonzero for the quotient P / P_r")
    P_r = P * r ** np.arange(P.size)
    impulse = np.zeros(int(length) + 1, dtype=np.complex128)
    impulse[0] = 1.0
    return signal.lfilter(P, P_r, impulse)


def _start_length(r: float, start_factor: float) -> int:
    return max(16, int(math.ceil(start_factor / (1.0 - r))))


def _one_var_converged(
    P: Sequence[complex], alpha: float, r: float, start_factor: float, tail_tol: float, cap: int,
) -> Tuple[np.ndarray, float, float, bool]:
    """Quotient coefficients long enough that doubling moves the norm by < tail_tol."""
    length = min(_start_length(r, start_factor), cap)
    coeffs = one_var_quotient(P, r, length)
    norm = one_var_norm_sq(coeffs, alpha)
    while True:
        longer_len = min(2 * length, cap)
        longer = one_var_quotient(P, r, longer_len)
        longer_norm = one_var_norm_sq(longer, alpha)
        tail = abs(longer_norm - norm) / longer_norm if longer_norm > 0 else 0.0
        if tail < tail_tol:
            return longer, longer_norm, tail, True
        if longer_len >= cap:
            logger.warning(f"r={r}: quotient not converged at length {longer_len} (tail {tail:.3g}).")
            return longer, longer_norm, tail, False
        length, coeffs, norm = longer_len, longer, longer_norm


# ----------------------------------------------------------- #
#                           Sweeps                            #
# ----------------------------------------------------------- #

def _one_var_record(P, alpha: float, r: float, start_factor: float, tail_tol: float, cap: int) -> DilationRecord:
    coeffs, norm, tail, reliable = _one_var_converged(P, alpha, r, start_factor, tail_tol, cap)
    seminorm = one_var_integral_norm_sq(coeffs, alpha) if alpha < 2.0 else math.nan
    return DilationRecord(r=r, norm_sq=norm, seminorm=seminorm, box=coeffs.size - 1,
                          tail=tail, reliable=reliable, dirichlet_sq=norm - abs(coeffs[0]) ** 2)


def one_var_quotient_sweep(
    P: Sequence[complex],
    alpha: float,
    r_grid: Sequence[float] = DEFAULT_DILATION_PARAMS["DILATION_R_GRID"],
    *,
    start_factor: float = DEFAULT_DILATION_PARAMS["DILATION_START_FACTOR"],
    tail_tol: float = DEFAULT_DILATION_PARAMS["DILATION_TAIL_TOL"],
    cap: int = DEFAULT_DILATION_PARAMS["DILATION_ONE_VAR_CAP"],
    threads: int = 1,
) -> DilationSweep:
    """||P / P_r||^2 in D_alpha for each r; P must be zero-free on the open disk."""
    grid = sorted(_check_radius(r) for r in r_grid)
    records = map_parallel(lambda r: _one_var_record(P, float(alpha), r, start_factor, tail_tol, cap),
                           grid, threads)
    return DilationSweep(records=records, weights=(float(alpha),), path="one_variable")


def _general_quotient(
    p: BivariateSeries, r: float, box: Optional[int], start_factor: float, tail_tol: float, cap: int, w: WeightPair,
) -> Tuple[BivariateSeries, float, float, bool]:
    size = min(int(box) if box else _start_length(r, start_factor / 2.0), cap)
    current = dilation_quotient(p, r, (size, size))
    norm = coeff_norm_sq(current, w)
    while True:
        larger = min(2 * size, cap)
        if larger == size:
            logger.warning(f"r={r}: box cap {cap} reached before the tail settled; record marked unreliable.")
            return current, norm, math.nan, False
        candidate = dilation_quotient(p, r, (larger, larger))
        cand_norm = coeff_norm_sq(candidate, w)
        tail = abs(cand_norm - norm) / cand_norm if cand_norm > 0 else 0.0
        if tail < tail_tol:
            return candidate, cand_norm, tail, True
        size, current, norm = larger, candidate, cand_norm
        if size >= cap:
            logger.warning(f"r={r}: box cap {cap} reached (tail {tail:.3g}); record marked unreliable.")
            return current, norm, tail, False


def two_var_sweep(
    p: BivariateSeries,
    w: WeightPair,
    r_grid: Sequence[float] = DEFAULT_DILATION_PARAMS["DILATION_R_GRID"],
    box: Optional[int] = None,
    *,
    start_factor: float = DEFAULT_DILATION_PARAMS["DILATION_START_FACTOR"],
    tail_tol: float = DEFAULT_DILATION_PARAMS["DILATION_TAIL_TOL"],
    cap: int = DEFAULT_DILATION_PARAMS["DILATION_BOX_CAP"],
    one_var_cap: int = DEFAULT_DILATION_PARAMS["DILATION_ONE_VAR_CAP"],
    threads: int = 1,
) -> DilationSweep:
    """Norms of F_r = p / p_r in D_w along the r grid.

    Diagonal p = P(z1 z2) is swept through the one-variable quotient and
    the identity ||F(z1 z2)||_w = ||F||_(alpha1 + alpha2); the box then grows
    like start_factor / (1 - r). Other p use 2-D truncations doubled up to
    ``cap`` per axis. The integral seminorm is filled in only when both
    alphas are below 2.
    """
    grid = sorted(_check_radius(r) for r in r_grid)
    integrable = w.alpha1 < 2.0 and w.alpha2 < 2.0
    try:
        diagonal = diagonal_extract(p)
    except NotDiagonal:
        diagonal = None

    if diagonal is not None:
        def diagonal_record(r: float) -> DilationRecord:
            coeffs, norm, tail, reliable = _one_var_converged(diagonal, w.total, r, start_factor, tail_tol, one_var_cap)
            seminorm = diagonal_integral_norm_sq(coeffs, w) if integrable else math.nan
            return DilationRecord(r=r, norm_sq=norm, seminorm=seminorm, box=coeffs.size - 1, tail=tail,
                                  reliable=reliable, dirichlet_sq=norm - abs(coeffs[0]) ** 2)

        records = map_parallel(diagonal_record, grid, threads)
        return DilationSweep(records=records, weights=tuple(w.as_list()), path="diagonal")

    def general_record(r: float) -> DilationRecord:
        series, norm, tail, reliable = _general_quotient(p, r, box, start_factor, tail_tol, cap, w)
        seminorm = integral_seminorm(series, w) if integrable else math.nan
        return DilationRecord(r=r, norm_sq=norm, seminorm=seminorm, box=series.box[0], tail=tail,
                              reliable=reliable, dirichlet_sq=norm - abs(series.constant_term) ** 2)

    records = map_parallel(general_record, grid, threads)
    return DilationSweep(records=records, weights=tuple(w.as_list()), path="general")


def derivative_sweep(
    p: BivariateSeries,
    w: WeightPair,
    r_grid: Sequence[float] = DEFAULT_DILATION_PARAMS["DILATION_R_GRID"],
    order: int = 1,
    box: Optional[int] = None,
    *,
    start_factor: float = DEFAULT_DILATION_PARAMS["DILATION_START_FACTOR"],
    tail_tol: float = DEFAULT_DILATION_PARAMS["DILATION_TAIL_TOL"],
    cap: int = DEFAULT_DILATION_PARAMS["DILATION_BOX_CAP"],
) -> pd.DataFrame:
    """||d^k/dz1^k F_r||^2 in D_(alpha1 - 2k, alpha2) for each r."""
    if order < 1:
        raise ParameterOutOfRange(f"derivative order must be >= 1, got {order}")
    shifted = WeightPair(w.alpha1 - 2.0 * order, w.alpha2)
    grid = sorted(_check_radius(r) for r in r_grid)
    try:
        diagonal = diagonal_extract(p)
    except NotDiagonal:
        diagonal = None

    rows = []
    for r in grid:
        if diagonal is not None:
            coeffs, _, _, reliable = _one_var_converged(diagonal, w.total, r, start_factor, tail_tol,
                                                        DEFAULT_DILATION_PARAMS["DILATION_ONE_VAR_CAP"])
            j = np.arange(coeffs.size, dtype=np.float64)
            falling = special.poch(j - order + 1.0, order)
            keep = j >= order
            weights = ((j[keep] - order + 1.0) ** shifted.alpha1) * ((j[keep] + 1.0) ** shifted.alpha2)
            value = float(np.sum(weights * (falling[keep] * np.abs(coeffs[keep])) ** 2))
            size = coeffs.size - 1
        else:
            series, _, _, reliable = _general_quotient(p, r, box, start_factor, tail_tol, cap, w)
            value = coeff_norm_sq(partial_derivative(series, axis=0, order=order), shifted)
            size = series.box[0]
        rows.append({"r": r, "order": order, "shifted_alpha1": shifted.alpha1,
                     "derivative_norm_sq": value, "box": size, "reliable": reliable})
    return pd.DataFrame(rows)


# ----------------------------------------------------------- #
#                         Verdicts                            #
# ----------------------------------------------------------- #

def boundedness_verdict(
    sweep: DilationSweep,
    *,
    bounded_factor: float = DEFAULT_DILATION_PARAMS["BOUNDED_FACTOR"],
    divergence_factor: float = DEFAULT_DILATION_PARAMS["DIVERGENCE_FACTOR"],
) -> str:
    """bounded | divergent | undetermined from the reliable records of a sweep.

    divergent: the last norm is at least ``divergence_factor`` times the norm
    one decade earlier in 1 - r. bounded: max/min below ``bounded_factor``
    with no blow-up (strict increase with doubling) over the last three points.
    """
    records = sorted((rec for rec in sweep.records if rec.reliable), key=lambda rec: rec.r)
    if len(records) < 2:
        return "undetermined"
    r = np.array([rec.r for rec in records])
    v = np.array([rec.norm_sq for rec in records])

    target = 1.0 - 10.0 * (1.0 - r[-1])
    earlier = int(np.argmin(np.abs(r[:-1] - target)))
    if math.isclose(r[earlier], target, rel_tol=1e-6, abs_tol=1e-9) and v[earlier] > 0:
        if v[-1] / v[earlier] >= divergence_factor:
            return "divergent"

    blow_up = len(v) >= 3 and bool(np.all(np.diff(v[-3:]) > 0)) and v[-1] >= 2.0 * v[-3]
    if v.min() > 0 and v.max() / v.min() < bounded_factor and not blow_up:
        return "bounded"
    return "undetermined"


# ----------------------------------------------------------- #
#                       Model integral                        #
# ----------------------------------------------------------- #

def model_integral(
    r: float,
    *,
    rel_tol: float = DEFAULT_DILATION_PARAMS["MODEL_REL_TOL"],
    max_nodes: int = DEFAULT_DILATION_PARAMS["MODEL_MAX_NODES"],
) -> float:
    """(1 - r) times the integral over the bidisk of |1 - r z1 z2|^-4 dA dA.

    Averaging over both angles leaves (1 + x) / (1 - x)^3 with
    x = r^2 u1 u2 (u = |z|^2); the remaining square is a tensor Gauss-Legendre
    rule doubled until the value settles.
    """
    r = _check_radius(r)
    previous = None
    n = 32
    while True:
        u, weights = gauss_legendre_unit_interval(n)
        x = r * r * np.outer(u, u)
        values = (1.0 + x) / (1.0 - x) ** 3
        total = (1.0 - r) * float(weights @ values @ weights)
        if previous is not None and abs(total - previous) <= rel_tol * abs(total):
            return total
        if n >= max_nodes:
            logger.warning(f"model_integral(r={r}) not settled at {n} nodes per axis.")
            return total
        previous = total
        n *= 2
