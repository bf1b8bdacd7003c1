"""Norms, inner products and quadrature for the anisotropic Dirichlet spaces D_(a1, a2)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from shared_tools.lab_errors import ParameterOutOfRange
from shared_tools.series_core import BivariateSeries, partial_derivative

logger = logging.getLogger(__name__)

DEFAULT_SPACES_PARAMS = {
    "QUAD_RADIAL_N": 16,
    "QUAD_ANGULAR_N": 64,
    "QUAD_REL_TOL": 1e-3,
    "QUAD_MAX_RADIAL_N": 4096,
    "FR_WMOD_CAP": 0.9999,
}


@dataclass(frozen=True)
class WeightPair:
    """The parameter pair (alpha1, alpha2); any finite reals, negatives included."""

    alpha1: float
    alpha2: float

    def __post_init__(self) -> None:
        a1, a2 = float(self.alpha1), float(self.alpha2)
        if not (math.isfinite(a1) and math.isfinite(a2)):
            raise ParameterOutOfRange(f"weight parameters must be finite, got ({self.alpha1}, {self.alpha2})")
        object.__setattr__(self, "alpha1", a1)
        object.__setattr__(self, "alpha2", a2)

    @property
    def total(self) -> float:
        return self.alpha1 + self.alpha2

    @property
    def minimum(self) -> float:
        return min(self.alpha1, self.alpha2)

    def swapped(self) -> "WeightPair":
        return WeightPair(self.alpha2, self.alpha1)

    def as_list(self):
        return [self.alpha1, self.alpha2]


def coefficient_weights(w: WeightPair, shape: Tuple[int, int]) -> np.ndarray:
    """Matrix of (k+1)^alpha1 (l+1)^alpha2 for the given coefficient shape."""
    rows = np.arange(1, shape[0] + 1, dtype=np.float64) ** w.alpha1
    cols = np.arange(1, shape[1] + 1, dtype=np.float64) ** w.alpha2
    return np.outer(rows, cols)


def coeff_norm_sq(f: BivariateSeries, w: WeightPair) -> float:
    weights = coefficient_weights(w, f.coeffs.shape)
    return float(np.sum(weights * np.abs(f.coeffs) ** 2))


def inner_product(f: BivariateSeries, g: BivariateSeries, w: WeightPair) -> complex:
    shape = (max(f.coeffs.shape[0], g.coeffs.shape[0]), max(f.coeffs.shape[1], g.coeffs.shape[1]))
    a = np.zeros(shape, dtype=np.complex128)
    b = np.zeros(shape, dtype=np.complex128)
    a[:f.coeffs.shape[0], :f.coeffs.shape[1]] = f.coeffs
    b[:g.coeffs.shape[0], :g.coeffs.shape[1]] = g.coeffs
    return complex(np.sum(coefficient_weights(w, shape) * a * np.conj(b)))


def one_var_norm_sq(coeffs: Sequence[complex], alpha: float) -> float:
    arr = np.asarray(coeffs, dtype=np.complex128).ravel()
    weights = np.arange(1, arr.size + 1, dtype=np.float64) ** float(alpha)
    return float(np.sum(weights * np.abs(arr) ** 2))


# ----------------------------------------------------------- #
#                         Quadrature                          #
# ----------------------------------------------------------- #

@lru_cache(maxsize=128)
def _jacobi_rule(n: int, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes u in (0,1) and weights for integrals of h(u) (1-u)^beta du over [0, 1]."""
    x, wts = special.roots_jacobi(n, beta, 0.0)
    u = (x + 1.0) / 2.0
    weights = wts * 2.0 ** (-beta - 1.0)
    u.setflags(write=False)
    weights.setflags(write=False)
    return u, weights


@lru_cache(maxsize=64)
def gauss_legendre_unit_interval(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, wts = special.roots_legendre(n)
    u = (x + 1.0) / 2.0
    weights = wts / 2.0
    u.setflags(write=False)
    weights.setflags(write=False)
    return u, weights


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor rule for dA_alpha1 x dA_alpha2 on the bidisk.

    Radial rules live in u = |z|^2 and absorb the weight (1-u)^(1-alpha);
    the normalised area measure turns into du times the angular mean, so the
    radial weights of an axis sum to 1/(2 - alpha). Angular nodes are uniform
    and at least twice the degree they are used with, which makes the angular
    mean of |sum c_k rho^k e^{ik theta}|^2 equal to sum |c_k|^2 rho^(2k)
    exactly; the tensor sums below use that closed form.
    """

    alpha1: float
    alpha2: float
    radial_nodes1: np.ndarray
    radial_weights1: np.ndarray
    radial_nodes2: np.ndarray
    radial_weights2: np.ndarray
    angular_n1: int
    angular_n2: int

    @property
    def radial_n(self) -> int:
        return int(self.radial_nodes1.size)

    @property
    def total_weight(self) -> Tuple[float, float]:
        return float(np.sum(self.radial_weights1)), float(np.sum(self.radial_weights2))


def check_integrable(w: WeightPair) -> None:
    if w.alpha1 >= 2.0 or w.alpha2 >= 2.0:
        raise ParameterOutOfRange(
            f"integral norm needs alpha1 < 2 and alpha2 < 2, got ({w.alpha1}, {w.alpha2})"
        )


def build_quadrature_grid(
    w: WeightPair,
    radial_n: int = DEFAULT_SPACES_PARAMS["QUAD_RADIAL_N"],
    angular_n: int = DEFAULT_SPACES_PARAMS["QUAD_ANGULAR_N"],
    degree: Tuple[int, int] = (0, 0),
) -> QuadratureGrid:
    check_integrable(w)
    if radial_n < 1:
        raise ParameterOutOfRange(f"radial node count must be positive, got {radial_n}")
    u1, w1 = _jacobi_rule(int(radial_n), 1.0 - w.alpha1)
    u2, w2 = _jacobi_rule(int(radial_n), 1.0 - w.alpha2)
    return QuadratureGrid(
        alpha1=w.alpha1,
        alpha2=w.alpha2,
        radial_nodes1=u1,
        radial_weights1=w1,
        radial_nodes2=u2,
        radial_weights2=w2,
        angular_n1=max(int(angular_n), 2 * (degree[0] + 1)),
        angular_n2=max(int(angular_n), 2 * (degree[1] + 1)),
    )


def radial_moments(nodes: np.ndarray, weights: np.ndarray, degree: int) -> np.ndarray:
    """Quadrature values of the integral of u^j against the radial weight, j = 0..degree."""
    moments = np.empty(max(degree, 0) + 1, dtype=np.float64)
    powers = np.ones_like(nodes)
    for j in range(moments.size):
        moments[j] = np.sum(weights * powers)
        powers = powers * nodes
    return moments


def _split_terms(coeffs: np.ndarray, grid: QuadratureGrid) -> Dict[str, float]:
    K, L = coeffs.shape[0] - 1, coeffs.shape[1] - 1
    if grid.angular_n1 <= K or grid.angular_n2 <= L:
        raise ParameterOutOfRange("angular resolution must exceed the series degree")
    m1 = radial_moments(grid.radial_nodes1, grid.radial_weights1, max(K - 1, 0))
    m2 = radial_moments(grid.radial_nodes2, grid.radial_weights2, max(L - 1, 0))
    k = np.arange(1, K + 1, dtype=np.float64)
    l = np.arange(1, L + 1, dtype=np.float64)
    row_factor = k ** 2 * m1[:K]
    col_factor = l ** 2 * m2[:L]
    abs_sq = np.abs(coeffs) ** 2
    edge1 = float(np.sum(row_factor * abs_sq[1:, 0])) if K else 0.0
    edge2 = float(np.sum(col_factor * abs_sq[0, 1:])) if L else 0.0
    mixed = float(np.sum(np.outer(row_factor, col_factor) * abs_sq[1:, 1:])) if K and L else 0.0
    constant = float(abs_sq[0, 0])
    return {
        "constant": constant,
        "edge_z1": edge1,
        "edge_z2": edge2,
        "mixed": mixed,
        "dirichlet": edge1 + edge2 + mixed,
        "total": constant + edge1 + edge2 + mixed,
    }


def _diagonal_terms(diag: np.ndarray, grid: QuadratureGrid) -> Dict[str, float]:
    K = diag.size - 1
    m1 = radial_moments(grid.radial_nodes1, grid.radial_weights1, max(K - 1, 0))
    m2 = radial_moments(grid.radial_nodes2, grid.radial_weights2, max(K - 1, 0))
    k = np.arange(1, K + 1, dtype=np.float64)
    abs_sq = np.abs(diag) ** 2
    mixed = float(np.sum(k ** 4 * m1[:K] * m2[:K] * abs_sq[1:])) if K else 0.0
    constant = float(abs_sq[0])
    return {
        "constant": constant,
        "edge_z1": 0.0,
        "edge_z2": 0.0,
        "mixed": mixed,
        "dirichlet": mixed,
        "total": constant + mixed,
    }


def _adaptive(
    compute: Callable[[QuadratureGrid], Dict[str, float]],
    w: WeightPair,
    degree: Tuple[int, int],
    radial_n: int,
    angular_n: int,
    rel_tol: float,
    max_radial_n: int,
) -> Dict[str, float]:
    """Double the radial node count until the total moves by less than rel_tol."""
    check_integrable(w)
    n = max(int(radial_n), 1)
    previous: Optional[float] = None
    while True:
        grid = build_quadrature_grid(w, n, angular_n, degree)
        terms = compute(grid)
        total = terms["total"]
        if previous is not None and abs(total - previous) <= rel_tol * abs(total):
            break
        if n >= max_radial_n:
            logger.warning(f"Quadrature did not settle below rel_tol={rel_tol} at {n} radial nodes.")
            break
        previous = total
        n *= 2
    terms["radial_n"] = n
    return terms


def dirichlet_integral_split(
    f: BivariateSeries,
    w: WeightPair,
    grid: Optional[QuadratureGrid] = None,
    *,
    radial_n: int = DEFAULT_SPACES_PARAMS["QUAD_RADIAL_N"],
    angular_n: int = DEFAULT_SPACES_PARAMS["QUAD_ANGULAR_N"],
    rel_tol: float = DEFAULT_SPACES_PARAMS["QUAD_REL_TOL"],
    max_radial_n: int = DEFAULT_SPACES_PARAMS["QUAD_MAX_RADIAL_N"],
) -> Dict[str, float]:
    """|f(0,0)|^2 plus the three Dirichlet integrals, each reported separately."""
    if grid is not None:
        radial_n, angular_n = grid.radial_n, min(grid.angular_n1, grid.angular_n2)
    return _adaptive(lambda g: _split_terms(f.coeffs, g), w, f.box,
                     radial_n, angular_n, rel_tol, max_radial_n)


def integral_seminorm(
    f: BivariateSeries,
    w: WeightPair,
    grid: Optional[QuadratureGrid] = None,
    **quadrature,
) -> float:
    """Integral form of the norm, |f(0,0)|^2 + D_w(f); requires alpha1, alpha2 < 2."""
    return dirichlet_integral_split(f, w, grid, **quadrature)["total"]


def diagonal_integral_norm_sq(diag: Sequence[complex], w: WeightPair, **quadrature) -> float:
    """Integral norm of F(z1 z2) computed from the diagonal coefficients of F alone."""
    arr = np.asarray(diag, dtype=np.complex128).ravel()
    K = arr.size - 1
    return _adaptive(
        lambda g: _diagonal_terms(arr, g), w, (K, K),
        quadrature.get("radial_n", DEFAULT_SPACES_PARAMS["QUAD_RADIAL_N"]),
        quadrature.get("angular_n", DEFAULT_SPACES_PARAMS["QUAD_ANGULAR_N"]),
        quadrature.get("rel_tol", DEFAULT_SPACES_PARAMS["QUAD_REL_TOL"]),
        quadrature.get("max_radial_n", DEFAULT_SPACES_PARAMS["QUAD_MAX_RADIAL_N"]),
    )["total"]


def one_var_integral_norm_sq(coeffs: Sequence[complex], alpha: float, **quadrature) -> float:
    """|F(0)|^2 + integral of |F'|^2 (1-|z|^2)^(1-alpha) dA, for alpha < 2."""
    arr = np.asarray(coeffs, dtype=np.complex128).ravel()
    f = BivariateSeries(arr.reshape(-1, 1))
    return integral_seminorm(f, WeightPair(alpha, 0.0), **quadrature)


def compact_integral_norm_sq(
    f: BivariateSeries,
    w: WeightPair,
    *,
    radial_n: int = DEFAULT_SPACES_PARAMS["QUAD_RADIAL_N"],
    angular_n: int = DEFAULT_SPACES_PARAMS["QUAD_ANGULAR_N"],
    rel_tol: float = DEFAULT_SPACES_PARAMS["QUAD_REL_TOL"],
    max_radial_n: int = DEFAULT_SPACES_PARAMS["QUAD_MAX_RADIAL_N"],
) -> float:
    """Integral of |d2 d1 (z1 z2 f)|^2 dA_alpha1 dA_alpha2 (equivalent, not equal, to the split form)."""
    K, L = f.box

    def compute(grid: QuadratureGrid) -> Dict[str, float]:
        m1 = radial_moments(grid.radial_nodes1, grid.radial_weights1, K)
        m2 = radial_moments(grid.radial_nodes2, grid.radial_weights2, L)
        rows = np.arange(1, K + 2, dtype=np.float64) ** 2 * m1
        cols = np.arange(1, L + 2, dtype=np.float64) ** 2 * m2
        return {"total": float(np.sum(np.outer(rows, cols) * np.abs(f.coeffs) ** 2))}

    return _adaptive(compute, w, (K + 1, L + 1), radial_n, angular_n, rel_tol, max_radial_n)["total"]


def derivative_membership(f: BivariateSeries, w: WeightPair, order: int = 1) -> Dict[str, float]:
    """Compare d^k/dz1^k f in D_(alpha1 - 2k, alpha2) with the part of f of z1-degree >= k.

    The two quantities are comparable with constants depending only on k
    and alpha1, so membership of one is membership of the other.
    """
    if order < 1:
        raise ParameterOutOfRange(f"derivative order must be >= 1, got {order}")
    shifted = WeightPair(w.alpha1 - 2.0 * order, w.alpha2)
    derivative = partial_derivative(f, axis=0, order=order)
    tail = BivariateSeries(np.vstack([np.zeros((order, f.coeffs.shape[1])), f.coeffs[order:, :]])) \
        if f.coeffs.shape[0] > order else BivariateSeries(np.zeros((1, f.coeffs.shape[1])))
    derivative_norm = coeff_norm_sq(derivative, shifted)
    tail_norm = coeff_norm_sq(tail, w)
    return {
        "order": order,
        "shifted_alpha1": shifted.alpha1,
        "derivative_norm_sq": derivative_norm,
        "tail_norm_sq": tail_norm,
        "ratio": derivative_norm / tail_norm if tail_norm > 0 else float("nan"),
    }


# ----------------------------------------------------------- #
#                    Forelli-Rudin integral                   #
# ----------------------------------------------------------- #

def forelli_rudin(
    a: float,
    b: float,
    w_mod: float,
    *,
    w_mod_cap: float = DEFAULT_SPACES_PARAMS["FR_WMOD_CAP"],
    limit: int = 400,
) -> float:
    """Integral over the disk of (1-|z|)^a / |1 - conj(w) z|^(2+a+b) dA(z), |w| = w_mod.

    The angular mean of |1 - x e^{it}|^(-2s) is 2F1(s, s; 1; x^2), written
    through Euler's transformation so the blow-up factor stays explicit;
    the radial integral is adaptive with the algebraic endpoint weight.
    """
    if a <= -1.0:
        raise ParameterOutOfRange(f"Forelli-Rudin integral needs a > -1, got {a}")
    if not (0.0 <= w_mod < 1.0):
        raise ParameterOutOfRange(f"w_mod must lie in [0, 1), got {w_mod}")
    if w_mod > w_mod_cap:
        logger.debug(f"w_mod={w_mod} capped at {w_mod_cap}")
        w_mod = w_mod_cap
    s = (2.0 + a + b) / 2.0

    def integrand(rho: float) -> float:
        x = (w_mod * rho) ** 2
        angular_mean = (1.0 - x) ** (1.0 - 2.0 * s) * special.hyp2f1(1.0 - s, 1.0 - s, 1.0, x)
        return 2.0 * rho * angular_mean

    breakpoint_hint = max(0.0, 1.0 - 50.0 * (1.0 - w_mod))
    if 0.0 < breakpoint_hint < 1.0:
        # quad anchors "alg" at the limits, so (1 - rho)^a stays in the integrand on [0, c]
        head, _ = integrate.quad(lambda rho: integrand(rho) * (1.0 - rho) ** a, 0.0, breakpoint_hint,
                                 limit=limit, epsrel=1e-10)
        # (1 - rho)^a on [c, 1] is (1 - c)^a (1 - t)^a in the variable t = (rho - c) / (1 - c)
        span = 1.0 - breakpoint_hint
        tail, _ = integrate.quad(lambda t: integrand(breakpoint_hint + span * t), 0.0, 1.0,
                                 weight="alg", wvar=(0.0, a), limit=limit, epsrel=1e-10)
        return float(head + tail * span ** (a + 1.0))
    value, _ = integrate.quad(integrand, 0.0, 1.0, weight="alg", wvar=(0.0, a),
                              limit=limit, epsrel=1e-10)
    return float(value)


def forelli_rudin_regime(b: float) -> str:
    """bounded for b < 0, logarithmic for b = 0, power for b > 0 (growth as |w| -> 1)."""
    if b < 0.0:
        return "bounded"
    return "logarithmic" if b == 0.0 else "power"


def forelli_rudin_normalized(a: float, b: float, w_mod: float, **kwargs) -> Dict[str, float]:
    """The integral divided by its predicted growth: 1, log 1/(1-|w|^2) or (1-|w|^2)^-b."""
    value = forelli_rudin(a, b, w_mod, **kwargs)
    regime = forelli_rudin_regime(b)
    gap = 1.0 - float(w_mod) ** 2
    if regime == "bounded":
        growth = 1.0
    elif regime == "logarithmic":
        growth = math.log(1.0 / gap) if gap < 1.0 else math.nan
    else:
        growth = gap ** (-b)
    return {"a": float(a), "b": float(b), "w_mod": float(w_mod), "integral": value,
            "regime": regime, "growth": growth, "ratio": value / growth if growth else math.nan}
