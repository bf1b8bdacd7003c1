"""Truncated bivariate power series and the structural transforms used across the lab.

A series is a dense complex matrix ``coeffs`` with ``coeffs[k, l]`` multiplying
``z1**k * z2**l``. Truncation is always explicit: every operation that can
grow the support takes a ``box=(K, L)`` argument and returns a matrix of shape
``(K + 1, L + 1)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import signal

from shared_tools.lab_errors import NotDiagonal, ParameterOutOfRange, ZeroConstantTerm

logger = logging.getLogger(__name__)

# Relative threshold under which trailing slices count as zero.
ZERO_THRESHOLD = 1e-12

Box = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class BivariateSeries:
    """Immutable coefficient matrix; rows are powers of z1, columns powers of z2."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coeffs, dtype=np.complex128, copy=True)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"coefficient matrix must be 2-D and non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite (no NaN/Inf)")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def box(self) -> Box:
        return self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1

    @property
    def constant_term(self) -> complex:
        return complex(self.coeffs[0, 0])

    def __repr__(self) -> str:
        return f"BivariateSeries(box={self.box})"


# ----------------------------------------------------------- #
#                        Constructors                         #
# ----------------------------------------------------------- #

def constant(value: complex) -> BivariateSeries:
    return BivariateSeries(np.array([[value]], dtype=np.complex128))


def monomial(k: int, l: int, value: complex = 1.0) -> BivariateSeries:
    coeffs = np.zeros((k + 1, l + 1), dtype=np.complex128)
    coeffs[k, l] = value
    return BivariateSeries(coeffs)


def from_one_variable(coeffs: Sequence[complex], axis: int = 0) -> BivariateSeries:
    """Embed a one-variable coefficient list as a series in z1 (axis 0) or z2 (axis 1)."""
    arr = np.asarray(coeffs, dtype=np.complex128).ravel()
    if axis == 0:
        return BivariateSeries(arr.reshape(-1, 1))
    if axis == 1:
        return BivariateSeries(arr.reshape(1, -1))
    raise ValueError(f"axis must be 0 or 1, got {axis}")


def embed_diagonal(coeffs: Sequence[complex]) -> BivariateSeries:
    """Return f(z1, z2) = F(z1 * z2) for the one-variable coefficients of F."""
    arr = np.asarray(coeffs, dtype=np.complex128).ravel()
    return BivariateSeries(np.diag(arr))


def pad_to_box(f: BivariateSeries, box: Box) -> BivariateSeries:
    """Truncate or zero-extend ``f`` to exactly the given box."""
    K, L = int(box[0]), int(box[1])
    if K < 0 or L < 0:
        raise ValueError(f"box must be nonnegative, got {box}")
    return BivariateSeries(_fit(f.coeffs, (K, L)))


def _fit(arr: np.ndarray, box: Box) -> np.ndarray:
    K, L = box
    out = np.zeros((K + 1, L + 1), dtype=np.complex128)
    rows = min(K + 1, arr.shape[0])
    cols = min(L + 1, arr.shape[1])
    out[:rows, :cols] = arr[:rows, :cols]
    return out


# ----------------------------------------------------------- #
#                         Arithmetic                          #
# ----------------------------------------------------------- #

def add(f: BivariateSeries, g: BivariateSeries) -> BivariateSeries:
    box = (max(f.box[0], g.box[0]), max(f.box[1], g.box[1]))
    return BivariateSeries(_fit(f.coeffs, box) + _fit(g.coeffs, box))


def subtract(f: BivariateSeries, g: BivariateSeries) -> BivariateSeries:
    return add(f, scale(g, -1.0))


def scale(f: BivariateSeries, c: complex) -> BivariateSeries:
    return BivariateSeries(f.coeffs * complex(c))


def multiply(f: BivariateSeries, g: BivariateSeries, box: Box) -> BivariateSeries:
    """Cauchy product truncated to ``box``; direct convolution, no FFT."""
    K, L = int(box[0]), int(box[1])
    a = f.coeffs[:K + 1, :L + 1]
    b = g.coeffs[:K + 1, :L + 1]
    full = signal.convolve2d(a, b, mode="full")
    return BivariateSeries(_fit(full, (K, L)))


def polynomial_product(f: BivariateSeries, g: BivariateSeries) -> BivariateSeries:
    """Exact product of two polynomials, box = sum of the boxes."""
    return multiply(f, g, (f.box[0] + g.box[0], f.box[1] + g.box[1]))


def reciprocal(f: BivariateSeries, box: Box) -> BivariateSeries:
    """Series g with f * g = 1 on the box.

    Solved row by row in powers of z1: row k satisfies
    f[0, :] * g[k, :] = delta_k0 - sum_{i>=1} f[i, :] * g[k-i, :] as a
    one-variable convolution, which is inverted exactly by recursive
    back-substitution (``lfilter`` with denominator f[0, :]).
    """
    f00 = f.coeffs[0, 0]
    if f00 == 0:
        raise ZeroConstantTerm("reciprocal needs a nonzero constant term f(0,0)")
    K, L = int(box[0]), int(box[1])
    a = f.coeffs[:K + 1, :L + 1]
    m = a.shape[0] - 1
    row0 = a[0, :]
    g = np.zeros((K + 1, L + 1), dtype=np.complex128)
    for k in range(K + 1):
        rhs = np.zeros(L + 1, dtype=np.complex128)
        if k == 0:
            rhs[0] = 1.0
        for i in range(1, min(k, m) + 1):
            rhs -= np.convolve(a[i, :], g[k - i, :])[:L + 1]
        g[k, :] = signal.lfilter([1.0], row0, rhs)
    return BivariateSeries(g)


def partial_derivative(f: BivariateSeries, axis: int, order: int = 1) -> BivariateSeries:
    """Derivative in z1 (axis 0) or z2 (axis 1); the box shrinks along that axis."""
    if axis not in (0, 1):
        raise ValueError(f"axis must be 0 or 1, got {axis}")
    if order < 0:
        raise ValueError("derivative order must be nonnegative")
    if order == 0:
        return f
    return BivariateSeries(npoly.polyder(f.coeffs, m=order, axis=axis))


# ----------------------------------------------------------- #
#                   Structural transforms                     #
# ----------------------------------------------------------- #

def dilate_z1(f: BivariateSeries, r: float) -> BivariateSeries:
    """Substitute z1 -> r * z1."""
    if not (0.0 < r <= 1.0):
        raise ParameterOutOfRange(f"dilation radius must lie in (0, 1], got {r}")
    powers = float(r) ** np.arange(f.coeffs.shape[0])
    return BivariateSeries(f.coeffs * powers[:, None])


def bidegree(p: BivariateSeries, tol: float = ZERO_THRESHOLD) -> Box:
    """Largest z1 and z2 exponents carrying a coefficient above ``tol`` times the largest one."""
    mags = np.abs(p.coeffs)
    top = float(mags.max())
    if top == 0.0:
        return 0, 0
    thresh = tol * top
    rows = np.nonzero(mags.max(axis=1) > thresh)[0]
    cols = np.nonzero(mags.max(axis=0) > thresh)[0]
    return int(rows.max()), int(cols.max())


def trim(p: BivariateSeries, tol: float = ZERO_THRESHOLD) -> BivariateSeries:
    m, n = bidegree(p, tol)
    return BivariateSeries(p.coeffs[:m + 1, :n + 1])


def reflect(p: BivariateSeries) -> BivariateSeries:
    """z1^m z2^n conj(p(1/conj(z1), 1/conj(z2))) for p of bidegree (m, n)."""
    q = trim(p).coeffs
    return BivariateSeries(np.conj(q[::-1, ::-1]))


def diagonal_extract(f: BivariateSeries, tol: float = ZERO_THRESHOLD) -> np.ndarray:
    """Coefficients of F when f(z1, z2) = F(z1 z2); raises NotDiagonal otherwise."""
    coeffs = f.coeffs
    mags = np.abs(coeffs)
    top = float(mags.max())
    off = mags.copy()
    d = min(coeffs.shape)
    off[np.arange(d), np.arange(d)] = 0.0
    if top > 0.0 and float(off.max()) > tol * top:
        raise NotDiagonal("series has off-diagonal coefficients")
    return np.diagonal(coeffs).copy()


def swap_variables(p: BivariateSeries) -> BivariateSeries:
    return BivariateSeries(p.coeffs.T)


def depends_on(p: BivariateSeries, tol: float = ZERO_THRESHOLD) -> Tuple[bool, bool]:
    """Whether p involves z1, z2 respectively."""
    m, n = bidegree(p, tol)
    return m > 0, n > 0


def is_zero(p: BivariateSeries) -> bool:
    return not np.any(p.coeffs)


def coefficient_slice(p: BivariateSeries, j: int, axis: int = 0) -> np.ndarray:
    """A_j(z2) (axis 0: coefficient of z1^j) or B_j(z1) (axis 1: coefficient of z2^j)."""
    coeffs = p.coeffs
    if axis == 0:
        if j > coeffs.shape[0] - 1:
            return np.zeros(coeffs.shape[1], dtype=np.complex128)
        return coeffs[j, :].copy()
    if axis == 1:
        if j > coeffs.shape[1] - 1:
            return np.zeros(coeffs.shape[0], dtype=np.complex128)
        return coeffs[:, j].copy()
    raise ValueError(f"axis must be 0 or 1, got {axis}")


def mobius_precompose(p: BivariateSeries, a: complex) -> BivariateSeries:
    """(1 - conj(a) z2)^n p(z1, phi(z2)) with phi(z) = (z - a)/(1 - conj(a) z).

    n is the z2-degree of p. The result is again a polynomial of z2-degree
    at most n; it is cyclic exactly when p is.
    """
    a = complex(a)
    if abs(a) >= 1.0:
        raise ParameterOutOfRange(f"Mobius parameter must lie in the open disk, got {a}")
    q = trim(p).coeffs
    n = q.shape[1] - 1
    numerator = np.array([-a, 1.0], dtype=np.complex128)
    denominator = np.array([1.0, -np.conj(a)], dtype=np.complex128)
    out = np.zeros((q.shape[0], n + 1), dtype=np.complex128)
    for l in range(n + 1):
        factor = npoly.polymul(npoly.polypow(numerator, l), npoly.polypow(denominator, n - l))
        out[:, :factor.size] += np.outer(q[:, l], factor)
    return BivariateSeries(out)


# ----------------------------------------------------------- #
#                        Evaluation                           #
# ----------------------------------------------------------- #

def evaluate(f: BivariateSeries, z1: complex, z2: complex) -> complex:
    """Horner evaluation of the stored truncation at one point."""
    return complex(npoly.polyval2d(complex(z1), complex(z2), f.coeffs))


def evaluate_many(f: BivariateSeries, z1, z2) -> np.ndarray:
    """Pointwise evaluation for equally shaped arrays of z1 and z2."""
    return np.asarray(npoly.polyval2d(np.asarray(z1, dtype=np.complex128),
                                      np.asarray(z2, dtype=np.complex128), f.coeffs))


def evaluate_grid(f: BivariateSeries, z1_values, z2_values) -> np.ndarray:
    """Values on the Cartesian grid z1_values x z2_values (rows follow z1)."""
    return np.asarray(npoly.polygrid2d(np.asarray(z1_values, dtype=np.complex128),
                                       np.asarray(z2_values, dtype=np.complex128), f.coeffs))


def slice_coefficients(p: BivariateSeries, z2: complex) -> np.ndarray:
    """Coefficients in z1 of p(., z2), lowest power first."""
    return npoly.polyval(complex(z2), p.coeffs.T)


def max_coefficient_gap(f: BivariateSeries, g: BivariateSeries) -> float:
    box = (max(f.box[0], g.box[0]), max(f.box[1], g.box[1]))
    return float(np.max(np.abs(_fit(f.coeffs, box) - _fit(g.coeffs, box))))
