"""Optimal polynomial approximants to 1/p: Gram systems, distance sequences and decay fits."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg, stats

from shared_tools.lab_errors import Inconclusive, NotDiagonal, NumericalBreakdown, ParameterOutOfRange
from shared_tools.series_core import (
    BivariateSeries,
    Box,
    constant,
    depends_on,
    diagonal_extract,
    from_one_variable,
    is_zero,
    polynomial_product,
    subtract,
    trim,
)
from shared_tools.shared_utils import map_parallel
from shared_tools.spaces import WeightPair, coeff_norm_sq, coefficient_weights

logger = logging.getLogger(__name__)

SHAPES = ("square", "diagonal", "z1", "z2")

DEFAULT_APPROX_PARAMS = {
    "APPROX_NMAX_DIAGONAL": 200,
    "APPROX_NMAX_SQUARE": 24,
    "DECAY_MIN_POINTS": 8,
    "DECAY_R2_MIN": 0.9,
    "PLATEAU_DIFF_TOL": 1e-6,
    "PLATEAU_LIMIT_MIN": 1e-3,
    "VANISHING_TOL": 1e-12,
}


# ----------------------------------------------------------- #
#                        Gram systems                         #
# ----------------------------------------------------------- #

@dataclass
class GramSystem:
    """Normal equations G q = v for min ||p q - 1||_w over the span of the shifts.

    ``gram[i, j] = <z^s_j p, z^s_i p>_w`` so that ``gram @ q = rhs``;
    ``rhs`` is conj(p(0,0)) at the (0,0) shift and zero elsewhere.
    """

    shifts: np.ndarray
    gram: np.ndarray
    rhs: np.ndarray
    weights: WeightPair

    @property
    def dimension(self) -> int:
        return int(self.shifts.shape[0])


def _box_shifts(n1: int, n2: int) -> np.ndarray:
    k, l = np.meshgrid(np.arange(n1 + 1), np.arange(n2 + 1), indexing="ij")
    k, l = k.ravel(), l.ravel()
    # shell order: every square sub-box is a leading block
    order = np.lexsort((l, k, np.maximum(k, l)))
    return np.column_stack([k[order], l[order]])


def basis_shifts(shape: str, n: int) -> np.ndarray:
    """Monomial exponents (k, l) of the approximant basis, nested in n."""
    if n < 0:
        raise ParameterOutOfRange(f"basis degree must be nonnegative, got {n}")
    if shape == "square":
        return _box_shifts(n, n)
    j = np.arange(n + 1)
    zeros = np.zeros_like(j)
    if shape == "diagonal":
        return np.column_stack([j, j])
    if shape == "z1":
        return np.column_stack([j, zeros])
    if shape == "z2":
        return np.column_stack([zeros, j])
    raise ParameterOutOfRange(f"unknown basis shape '{shape}' (expected one of {', '.join(SHAPES)})")


def prefix_size(shape: str, n: int) -> int:
    return (n + 1) ** 2 if shape == "square" else n + 1


def gram_from_shifts(p: BivariateSeries, shifts: np.ndarray, w: WeightPair) -> GramSystem:
    """Exact Gram entries from products of p coefficients at matching shifts."""
    if is_zero(p):
        raise ParameterOutOfRange("Gram system needs p not identically zero")
    coeffs = trim(p, tol=0.0).coeffs
    m, n = coeffs.shape[0] - 1, coeffs.shape[1] - 1
    shifts = np.asarray(shifts, dtype=np.int64)
    kmax, lmax = (int(v) for v in shifts.max(axis=0))
    weights = coefficient_weights(w, (kmax + m + 1, lmax + n + 1))
    index = -np.ones((kmax + 1, lmax + 1), dtype=np.int64)
    index[shifts[:, 0], shifts[:, 1]] = np.arange(shifts.shape[0])

    size = shifts.shape[0]
    gram = np.zeros((size, size), dtype=np.complex128)
    cols = np.arange(size)
    support = np.argwhere(coeffs != 0)
    for e in support:
        pe = coeffs[e[0], e[1]]
        w_at = weights[shifts[:, 0] + e[0], shifts[:, 1] + e[1]]
        for e_prime in support:
            target = shifts + e - e_prime
            valid = (target[:, 0] >= 0) & (target[:, 1] >= 0) & (target[:, 0] <= kmax) & (target[:, 1] <= lmax)
            rows = index[target[valid, 0], target[valid, 1]]
            keep = rows >= 0
            contribution = w_at[valid][keep] * pe * np.conj(coeffs[e_prime[0], e_prime[1]])
            np.add.at(gram, (rows[keep], cols[valid][keep]), contribution)

    rhs = np.zeros(size, dtype=np.complex128)
    origin = index[0, 0]
    if origin >= 0:
        rhs[origin] = np.conj(coeffs[0, 0])
    return GramSystem(shifts=shifts, gram=gram, rhs=rhs, weights=w)


def build_gram(p: BivariateSeries, box: Box, w: WeightPair) -> GramSystem:
    return gram_from_shifts(p, _box_shifts(int(box[0]), int(box[1])), w)


def _solve(gram: np.ndarray, rhs: np.ndarray, label: Any = None) -> np.ndarray:
    try:
        factor = linalg.cho_factor(gram, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericalBreakdown(f"Cholesky failed for Gram system {label}: {exc}") from exc
    q = linalg.cho_solve(factor, rhs, check_finite=False)
    # one step of iterative refinement
    q = q + linalg.cho_solve(factor, rhs - gram @ q, check_finite=False)
    if not np.all(np.isfinite(q)):
        raise NumericalBreakdown(f"non-finite solution for Gram system {label}")
    return q


def approximant_series(shifts: np.ndarray, q: np.ndarray) -> BivariateSeries:
    shifts = np.asarray(shifts, dtype=np.int64)
    coeffs = np.zeros((int(shifts[:, 0].max()) + 1, int(shifts[:, 1].max()) + 1), dtype=np.complex128)
    coeffs[shifts[:, 0], shifts[:, 1]] = q
    return BivariateSeries(coeffs)


def distance_squared(p: BivariateSeries, q: BivariateSeries, w: WeightPair) -> float:
    """||p q - 1||^2_w evaluated from the exact product coefficients."""
    return coeff_norm_sq(subtract(polynomial_product(p, q), constant(1.0)), w)


def orthogonality_residual(system: GramSystem, q: np.ndarray) -> float:
    """max_i |<p q - 1, z^s_i p>_w|, which vanishes at the optimum."""
    return float(np.max(np.abs(system.gram @ q - system.rhs)))


def solve_optimal(p: BivariateSeries, box: Box, w: WeightPair) -> Tuple[BivariateSeries, float]:
    """Optimal approximant q* on the box and ||p q* - 1||^2_w.

    At the optimum this equals 1 - Re(p(0,0) q*(0,0)); the residual norm is
    returned because it stays nonnegative when the Gram matrix is badly
    conditioned.
    """
    system = build_gram(p, box, w)
    q = _solve(system.gram, system.rhs, box)
    q_series = approximant_series(system.shifts, q)
    return q_series, distance_squared(p, q_series, w)


# ----------------------------------------------------------- #
#                     Distance sequences                      #
# ----------------------------------------------------------- #

@dataclass
class DistanceSequence:
    ns: np.ndarray
    dist_sq: np.ndarray
    shape: str = "square"
    weights: Optional[WeightPair] = None

    def __len__(self) -> int:
        return int(self.ns.size)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"N": self.ns.astype(int), "dist_sq": self.dist_sq.astype(float)})

    def value_at(self, n: int) -> float:
        hits = np.nonzero(self.ns == n)[0]
        if hits.size == 0:
            raise KeyError(n)
        return float(self.dist_sq[hits[0]])


def natural_shape(p: BivariateSeries) -> str:
    """Smallest exact basis: one variable, diagonal, or the full square."""
    uses_z1, uses_z2 = depends_on(p)
    if uses_z1 and not uses_z2:
        return "z1"
    if uses_z2 and not uses_z1:
        return "z2"
    try:
        diagonal_extract(p)
        return "diagonal"
    except NotDiagonal:
        return "square"


def _check_shape_fits(p: BivariateSeries, shape: str) -> None:
    uses_z1, uses_z2 = depends_on(p)
    if shape == "diagonal":
        try:
            diagonal_extract(p)
        except NotDiagonal:
            logger.warning("Diagonal basis used for a non-diagonal polynomial; distances are upper bounds.")
    elif shape == "z1" and uses_z2:
        logger.warning("z1 basis used for a polynomial involving z2; distances are upper bounds.")
    elif shape == "z2" and uses_z1:
        logger.warning("z2 basis used for a polynomial involving z1; distances are upper bounds.")


def distance_sequence(
    p: BivariateSeries,
    w: WeightPair,
    n_max: Optional[int] = None,
    shape: str = "square",
    *,
    threads: int = 1,
) -> DistanceSequence:
    """dist^2_N for N = 0..n_max over nested bases of the given shape.

    The Gram matrix is assembled once for n_max; each N solves its leading
    block. On a Cholesky failure the exception carries the largest N that
    completed and the partial sequence in ``details``.
    """
    if shape not in SHAPES:
        raise ParameterOutOfRange(f"unknown basis shape '{shape}'")
    if n_max is None:
        n_max = DEFAULT_APPROX_PARAMS["APPROX_NMAX_SQUARE" if shape == "square" else "APPROX_NMAX_DIAGONAL"]
    n_max = int(n_max)
    _check_shape_fits(p, shape)
    shifts = basis_shifts(shape, n_max)
    system = gram_from_shifts(p, shifts, w)
    logger.debug(f"Gram system assembled: shape={shape}, N_max={n_max}, dimension={system.dimension}")

    def attempt(n: int):
        size = prefix_size(shape, n)
        try:
            q = _solve(system.gram[:size, :size], system.rhs[:size], n)
        except NumericalBreakdown as exc:
            return math.nan, exc
        return distance_squared(p, approximant_series(shifts[:size], q), w), None

    outcomes = map_parallel(attempt, list(range(n_max + 1)), threads)
    values: List[float] = []
    for n, (value, error) in enumerate(outcomes):
        if error is not None:
            raise NumericalBreakdown(
                f"Gram solve broke down at N={n}",
                largest_completed=n - 1 if n > 0 else None,
                details={"partial": values, "shape": shape},
            ) from error
        values.append(value)
    return DistanceSequence(ns=np.arange(n_max + 1), dist_sq=np.asarray(values), shape=shape, weights=w)


def one_var_distance_sequence(
    coeffs: Sequence[complex], alpha: float, n_max: int = DEFAULT_APPROX_PARAMS["APPROX_NMAX_DIAGONAL"],
    *, threads: int = 1,
) -> DistanceSequence:
    """Distance sequence of a one-variable P in D_alpha (embedded as a z1 polynomial)."""
    p = from_one_variable(coeffs, axis=0)
    return distance_sequence(p, WeightPair(alpha, 0.0), n_max, shape="z1", threads=threads)


# ----------------------------------------------------------- #
#                         Decay fits                          #
# ----------------------------------------------------------- #

@dataclass
class DecayReport:
    regime: str
    slope: Optional[float] = None
    limit: Optional[float] = None
    r_squared: Optional[float] = None
    window: Tuple[int, int] = (0, 0)
    fits: Dict[str, Any] = field(default_factory=dict)

    @property
    def decaying(self) -> bool:
        return self.regime in ("power_law", "logarithmic", "vanishing")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "regime": self.regime,
            "slope": self.slope,
            "limit": self.limit,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "fits": self.fits,
        }


def _linear_fit(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    if x.size < 3 or np.ptp(x) == 0.0:
        return math.nan, math.nan, 0.0
    result = stats.linregress(x, y)
    return float(result.slope), float(result.intercept), float(result.rvalue ** 2)


def decay_fit(
    seq: DistanceSequence,
    *,
    min_points: int = DEFAULT_APPROX_PARAMS["DECAY_MIN_POINTS"],
    r2_min: float = DEFAULT_APPROX_PARAMS["DECAY_R2_MIN"],
    plateau_diff_tol: float = DEFAULT_APPROX_PARAMS["PLATEAU_DIFF_TOL"],
    plateau_limit_min: float = DEFAULT_APPROX_PARAMS["PLATEAU_LIMIT_MIN"],
    vanishing_tol: float = DEFAULT_APPROX_PARAMS["VANISHING_TOL"],
) -> DecayReport:
    """Classify the tail of a distance sequence.

    Fits are made on the last half of the sequence. A plateau is either
    literal (successive differences below ``plateau_diff_tol``) or
    extrapolated: when the differences decay like N^-gamma with gamma > 1,
    their tail sum bounds how far the sequence can still fall, and a limit
    above ``plateau_limit_min`` that keeps most of the last value counts.
    """
    ns = np.asarray(seq.ns, dtype=np.float64)
    d = np.asarray(seq.dist_sq, dtype=np.float64)
    if ns.size < min_points:
        raise Inconclusive(f"decay fit needs at least {min_points} points, got {ns.size}")
    start = ns.size // 2
    n_win, d_win = ns[start:], d[start:]
    window = (int(n_win[0]), int(n_win[-1]))
    d_last = float(d_win[-1])

    if d_last < vanishing_tol:
        return DecayReport("vanishing", limit=0.0, window=window)

    diffs = d_win[:-1] - d_win[1:]
    if float(np.max(np.abs(diffs))) < plateau_diff_tol and d_last > plateau_limit_min:
        return DecayReport("plateau", limit=d_last, r_squared=1.0, window=window,
                           fits={"plateau": {"method": "literal", "max_diff": float(np.max(np.abs(diffs)))}})

    fits: Dict[str, Any] = {}
    positive = (diffs > 0) & (n_win[1:] > 0)
    if np.count_nonzero(positive) >= 3:
        g_slope, _, g_r2 = _linear_fit(np.log(n_win[1:][positive]), np.log(diffs[positive]))
        gamma = -g_slope
        fits["differences"] = {"gamma": gamma, "r_squared": g_r2}
        if gamma > 1.0 and g_r2 > r2_min:
            last_diff = float(diffs[positive][-1])
            limit = d_last - last_diff * float(n_win[-1]) / (gamma - 1.0)
            fits["differences"]["limit"] = limit
            if limit > plateau_limit_min and limit >= 0.75 * d_last:
                return DecayReport("plateau", limit=limit, r_squared=g_r2, window=window,
                                   fits=dict(fits, plateau={"method": "extrapolated"}))

    mask = (n_win >= 2) & (d_win > 0)
    log_n = np.log(n_win[mask])
    log_d = np.log(d_win[mask])
    p_slope, _, p_r2 = _linear_fit(log_n, log_d)
    l_slope, _, l_r2 = _linear_fit(np.log(log_n), log_d)
    fits["power_law"] = {"slope": p_slope, "r_squared": p_r2}
    fits["logarithmic"] = {"slope": l_slope, "r_squared": l_r2}

    if max(p_r2, l_r2) < r2_min:
        raise Inconclusive(
            f"no decay model fits (power R2={p_r2:.3f}, logarithmic R2={l_r2:.3f}); rerun with larger N_max",
            details={"window": list(window), "fits": fits},
        )
    if -1.5 <= l_slope <= -0.5 and abs(p_slope) < 0.3 and l_r2 >= r2_min:
        return DecayReport("logarithmic", slope=l_slope, r_squared=l_r2, window=window, fits=fits)
    if p_r2 >= r2_min:
        return DecayReport("power_law", slope=p_slope, r_squared=p_r2, window=window, fits=fits)
    return DecayReport("logarithmic", slope=l_slope, r_squared=l_r2, window=window, fits=fits)


# ----------------------------------------------------------- #
#                 Orthogonal complement checks                #
# ----------------------------------------------------------- #

def orthocomplement_basis(p: BivariateSeries, w: WeightPair, box: int) -> Dict[str, Any]:
    """Weighted coefficient arrays b = W * f for f spanning the complement of p * P_(box - deg p).

    Complement is taken inside polynomials with both degrees <= box. Each b
    is scaled to max |b| = 1; ``weighted_sums`` holds sum |b|^2 / W for each.
    """
    coeffs = trim(p, tol=0.0).coeffs
    m, n = coeffs.shape[0] - 1, coeffs.shape[1] - 1
    size = int(box) + 1
    weights = coefficient_weights(w, (size, size))
    shifts = [(k, l) for k in range(size - m) for l in range(size - n)]
    if shifts:
        rows = []
        for k, l in shifts:
            phi = np.zeros((size, size), dtype=np.complex128)
            phi[k:k + m + 1, l:l + n + 1] = coeffs
            rows.append((np.conj(phi) * weights).ravel())
        complement = linalg.null_space(np.array(rows))
    else:
        complement = np.eye(size * size, dtype=np.complex128)

    vectors: List[np.ndarray] = []
    sums: List[float] = []
    for column in complement.T:
        b = weights * column.reshape(size, size)
        top = float(np.max(np.abs(b)))
        if top > 0.0:
            b = b / top
        vectors.append(b)
        sums.append(float(np.sum(np.abs(b) ** 2 / weights)))
    return {"shifts": shifts, "vectors": vectors, "weighted_sums": sums, "dimension": len(vectors)}


def orthocomplement_recurrence_check(p: BivariateSeries, w: WeightPair, box: int) -> float:
    """Max over complement vectors and shifts s of |sum_e conj(p_e) b_(s+e)|.

    For p = 2 - z1 - z2 this is the recurrence 2 b_(k,l) = b_(k+1,l) + b_(k,l+1).
    An empty complement gives 0.
    """
    basis = orthocomplement_basis(p, w, box)
    if not basis["vectors"] or not basis["shifts"]:
        return 0.0
    coeffs = trim(p, tol=0.0).coeffs
    m, n = coeffs.shape[0] - 1, coeffs.shape[1] - 1
    size = int(box) + 1
    rows, cols = size - m, size - n
    worst = 0.0
    for b in basis["vectors"]:
        acc = np.zeros((rows, cols), dtype=np.complex128)
        for e0, e1 in np.argwhere(coeffs != 0):
            acc += np.conj(coeffs[e0, e1]) * b[e0:e0 + rows, e1:e1 + cols]
        worst = max(worst, float(np.max(np.abs(acc))))
    return worst
