"""Torus zero sets, stability on the closed bidisk and an irreducibility heuristic."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from shared_tools.lab_errors import DegenerateInput, DegenerateSlice, ResolutionWarning
from shared_tools.series_core import (
    BivariateSeries,
    bidegree,
    depends_on,
    evaluate,
    evaluate_grid,
    partial_derivative,
    reflect,
    swap_variables,
    trim,
)
from shared_tools.series_io import format_polynomial

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

DEFAULT_ZEROSET_PARAMS = {
    "TORUS_GRID_N": 512,
    "STABILITY_RADIAL_N": 64,
    "STABILITY_ANGULAR_N": 256,
    "PROPORTIONAL_TOL": 1e-10,
    "NEWTON_MAX_ITER": 50,
    "NEWTON_GRAD_TOL": 1e-12,
    "ZERO_ACCEPT_TOL": 1e-8,
    "DEDUP_TOL": 1e-6,
    "CLUSTER_TOL": 1e-5,
    "STABILITY_TOL": 1e-9,
    "IRREDUCIBILITY_TRIALS": 4,
}


@dataclass
class TorusZeroClass:
    """Z(p) on the torus: empty, finitely many (s, t) angle pairs, or a curve."""

    tag: str
    points: List[Tuple[float, ...]] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    lam: Optional[complex] = None
    curve_points: List[Tuple[float, float]] = field(default_factory=list)
    conditional: bool = False

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "class": self.tag,
            "points": [list(pt) for pt in self.points],
            "residuals": list(self.residuals),
        }
        if self.lam is not None:
            out["lambda"] = [self.lam.real, self.lam.imag]
        if self.curve_points:
            out["curve_points"] = [list(pt) for pt in self.curve_points]
        if self.conditional:
            out["conditional"] = True
        return out


@dataclass
class StabilityReport:
    verdict: str
    witness: Optional[Tuple[complex, complex]] = None
    min_root_modulus: float = math.inf
    per_radius_min: List[float] = field(default_factory=list)
    degenerate_slices: int = 0
    side_conditions: Dict[str, bool] = field(default_factory=dict)
    swapped: bool = False
    slice_issue: Optional[DegenerateSlice] = None

    @property
    def zero_free(self) -> bool:
        return self.verdict == "zero_free"

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "stability": self.verdict,
            "min_root_modulus": self.min_root_modulus,
            "degenerate_slices": self.degenerate_slices,
            "side_conditions": dict(self.side_conditions),
        }
        if self.witness is not None:
            out["witness"] = [[z.real, z.imag] for z in self.witness]
        if self.slice_issue is not None:
            out["degenerate_slice"] = dict(self.slice_issue.details, message=str(self.slice_issue))
        return out


def _wrap(angle: float) -> float:
    value = math.fmod(angle, TWO_PI)
    if value < 0.0:
        value += TWO_PI
    # fmod can land on 2*pi after rounding
    return 0.0 if value >= TWO_PI else value


def _angle_gap(a: Sequence[float], b: Sequence[float]) -> float:
    diffs = [abs(x - y) % TWO_PI for x, y in zip(a, b)]
    return max(min(d, TWO_PI - d) for d in diffs)


# ----------------------------------------------------------- #
#                        Reflection                           #
# ----------------------------------------------------------- #

def reflection_test(p: BivariateSeries, tol: float = DEFAULT_ZEROSET_PARAMS["PROPORTIONAL_TOL"]) -> Dict[str, Any]:
    """Whether reflect(p) = lambda p, with lambda taken at the largest coefficient."""
    q = trim(p).coeffs
    reflected = reflect(p).coeffs
    mags = np.abs(q)
    top = float(mags.max())
    if top == 0.0:
        return {"proportional": False, "lambda": None, "residual": math.inf}
    idx = np.unravel_index(int(np.argmax(mags)), q.shape)
    lam = complex(reflected[idx] / q[idx])
    residual = float(np.max(np.abs(reflected - lam * q))) / top
    proportional = residual < tol
    return {"proportional": proportional, "lambda": lam if proportional else None, "residual": residual}


# ----------------------------------------------------------- #
#                    Slice root utilities                     #
# ----------------------------------------------------------- #

def _slice_matrix(q: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Row i holds the z1-coefficients of q(., values[i])."""
    vander = npoly.polyvander(values, q.shape[1] - 1)
    return vander @ q.T


def _batched_roots(coeff_rows: np.ndarray, tol: float = 1e-12) -> Tuple[List[np.ndarray], np.ndarray]:
    """Roots of each row polynomial (lowest power first) and its effective degree.

    Rows are grouped by effective degree and solved as stacks of companion
    matrices; a row whose leading coefficients vanish drops degree instead
    of producing spurious infinite roots.
    """
    count, width = coeff_rows.shape
    mags = np.abs(coeff_rows)
    scale = mags.max(axis=1)
    effective = np.full(count, -1, dtype=np.int64)
    for k in range(width):
        effective = np.where(mags[:, k] > tol * np.maximum(scale, 1e-300), k, effective)
    roots: List[np.ndarray] = [np.empty(0, dtype=np.complex128) for _ in range(count)]
    for d in np.unique(effective):
        if d <= 0:
            continue
        rows = np.nonzero(effective == d)[0]
        monic = coeff_rows[rows, :d + 1] / coeff_rows[rows, d:d + 1]
        companion = np.zeros((rows.size, d, d), dtype=np.complex128)
        if d > 1:
            companion[:, np.arange(1, d), np.arange(d - 1)] = 1.0
        companion[:, :, -1] = -monic[:, :d]
        eig = np.linalg.eigvals(companion)
        for pos, row in enumerate(rows):
            roots[row] = eig[pos]
    return roots, effective


def slice_roots(p: BivariateSeries, z2: complex) -> np.ndarray:
    """z1-roots of p(., z2)."""
    roots, _ = _batched_roots(_slice_matrix(trim(p).coeffs, np.array([complex(z2)])))
    return roots[0]


def _newton_z1(p: BivariateSeries, dp: BivariateSeries, z1: complex, z2: complex, steps: int = 8) -> complex:
    for _ in range(steps):
        value = evaluate(p, z1, z2)
        slope = evaluate(dp, z1, z2)
        if slope == 0 or value == 0:
            break
        z1 = z1 - value / slope
    return z1


# ----------------------------------------------------------- #
#                        Torus search                         #
# ----------------------------------------------------------- #

def _refine_on_torus(
    p: BivariateSeries, d1: BivariateSeries, d2: BivariateSeries, s: float, t: float,
    max_iter: int, grad_tol: float,
) -> Tuple[float, float, float]:
    """Levenberg-Marquardt on (Re p, Im p) in the angles (s, t)."""
    mu = 1e-3
    z1, z2 = np.exp(1j * s), np.exp(1j * t)
    value = evaluate(p, z1, z2)
    for _ in range(max_iter):
        a = 1j * z1 * evaluate(d1, z1, z2)
        b = 1j * z2 * evaluate(d2, z1, z2)
        J = np.array([[a.real, b.real], [a.imag, b.imag]])
        F = np.array([value.real, value.imag])
        grad = J.T @ F
        if float(np.max(np.abs(grad))) < grad_tol or abs(value) == 0.0:
            break
        JTJ = J.T @ J
        improved = False
        for _ in range(20):
            step = np.linalg.solve(JTJ + mu * np.eye(2), -grad)
            s_new, t_new = s + step[0], t + step[1]
            z1_new, z2_new = np.exp(1j * s_new), np.exp(1j * t_new)
            value_new = evaluate(p, z1_new, z2_new)
            if abs(value_new) < abs(value):
                s, t, z1, z2, value = s_new, t_new, z1_new, z2_new, value_new
                mu = max(mu / 3.0, 1e-15)
                improved = True
                break
            mu *= 4.0
        if not improved:
            break
    return _wrap(s), _wrap(t), abs(value)


def _sample_curve(p: BivariateSeries, grid_n: int, accept_tol: float) -> List[Tuple[float, float]]:
    q = trim(p)
    m, _ = bidegree(q)
    swapped = m == 0
    work = swap_variables(q) if swapped else q
    dwork = partial_derivative(work, axis=0)
    angles = TWO_PI * np.arange(grid_n) / grid_n
    roots, _ = _batched_roots(_slice_matrix(work.coeffs, np.exp(1j * angles)))
    points: List[Tuple[float, float]] = []
    for t, row in zip(angles, roots):
        z2 = complex(np.exp(1j * t))
        for root in row:
            if abs(abs(root) - 1.0) > 1e-6:
                continue
            z1 = _newton_z1(work, dwork, complex(root), z2)
            z1 = z1 / abs(z1)
            if abs(evaluate(work, z1, z2)) >= accept_tol:
                continue
            s = _wrap(math.atan2(z1.imag, z1.real))
            points.append((float(t), s) if swapped else (s, float(t)))
    return sorted(points)


def torus_zero_search(
    p: BivariateSeries,
    grid_n: int = DEFAULT_ZEROSET_PARAMS["TORUS_GRID_N"],
    *,
    max_iter: int = DEFAULT_ZEROSET_PARAMS["NEWTON_MAX_ITER"],
    grad_tol: float = DEFAULT_ZEROSET_PARAMS["NEWTON_GRAD_TOL"],
    accept_tol: float = DEFAULT_ZEROSET_PARAMS["ZERO_ACCEPT_TOL"],
    dedup_tol: float = DEFAULT_ZEROSET_PARAMS["DEDUP_TOL"],
    cluster_tol: float = DEFAULT_ZEROSET_PARAMS["CLUSTER_TOL"],
    proportional_tol: float = DEFAULT_ZEROSET_PARAMS["PROPORTIONAL_TOL"],
) -> TorusZeroClass:
    """Classify Z(p) on the torus as empty, finite or a curve.

    A reflection-proportional p is reported as a curve with sampled points.
    Otherwise |p| is scanned on a grid_n x grid_n angle grid; local minima
    under the Lipschitz cutoff are refined and deduplicated. Too many minima
    (a curve without the reflection witness) or minima closer than
    cluster_tol raise ResolutionWarning.
    """
    q = trim(p)
    if bidegree(q) == (0, 0):
        return TorusZeroClass("empty") if q.constant_term != 0 else TorusZeroClass("curve")

    reflection = reflection_test(q, proportional_tol)
    if reflection["proportional"]:
        samples = _sample_curve(q, grid_n, accept_tol)
        return TorusZeroClass("curve", lam=reflection["lambda"], curve_points=samples)

    angles = TWO_PI * np.arange(grid_n) / grid_n
    unit = np.exp(1j * angles)
    mags = np.abs(evaluate_grid(q, unit, unit))
    neighbours = [np.roll(np.roll(mags, di, axis=0), dj, axis=1)
                  for di in (-1, 0, 1) for dj in (-1, 0, 1) if di or dj]
    is_min = np.all([mags <= nb for nb in neighbours], axis=0)
    k_idx, l_idx = np.nonzero(q.coeffs)
    lipschitz = float(np.sum(np.abs(q.coeffs[k_idx, l_idx]) * (k_idx + l_idx)))
    cutoff = (TWO_PI / grid_n) * math.sqrt(2.0) * lipschitz
    candidates = np.argwhere(is_min & (mags <= cutoff))
    logger.debug(f"torus scan: {candidates.shape[0]} candidate minima below cutoff {cutoff:.3g}")

    d1 = partial_derivative(q, axis=0)
    d2 = partial_derivative(q, axis=1)
    found: List[Tuple[Tuple[float, float], float]] = []
    for i, j in candidates:
        s, t, res = _refine_on_torus(q, d1, d2, float(angles[i]), float(angles[j]), max_iter, grad_tol)
        if res >= accept_tol:
            continue
        for pos, (pt, old_res) in enumerate(found):
            if _angle_gap(pt, (s, t)) < dedup_tol:
                if res < old_res:
                    found[pos] = ((s, t), res)
                break
        else:
            found.append(((s, t), res))

    if not found:
        return TorusZeroClass("empty")
    found.sort(key=lambda item: item[0])
    if len(found) >= max(8, grid_n // 8):
        # a curve needs reflect(p) = lambda p, which failed above
        raise ResolutionWarning(
            f"{len(found)} isolated torus minima but reflect(p) is not proportional to p",
            details={"minima": len(found), "grid_n": grid_n,
                     "reflection_residual": reflection["residual"],
                     "sample": [list(pt) for pt, _ in found[:8]]},
        )
    for a in range(len(found)):
        for b in range(a + 1, len(found)):
            if _angle_gap(found[a][0], found[b][0]) < cluster_tol:
                raise ResolutionWarning(
                    "distinct torus zeros closer than the cluster threshold; increase grid_n",
                    details={"points": [list(found[a][0]), list(found[b][0])], "grid_n": grid_n},
                )
    return TorusZeroClass("finite", points=[pt for pt, _ in found], residuals=[res for _, res in found])


def face_zero_search(p: BivariateSeries, accept_tol: float = DEFAULT_ZEROSET_PARAMS["ZERO_ACCEPT_TOL"]) -> TorusZeroClass:
    """Zeros on the unit circle of a one-variable polynomial (a face of the torus).

    Points are 1-tuples of angles; the returned class is empty or finite.
    """
    q = trim(p)
    uses_z1, uses_z2 = depends_on(q)
    if uses_z1 and uses_z2:
        raise DegenerateInput("face_zero_search needs a polynomial in one variable")
    coeffs = q.coeffs[:, 0] if not uses_z2 else q.coeffs[0, :]
    if coeffs.size < 2:
        return TorusZeroClass("empty")
    deriv = npoly.polyder(coeffs)
    points, residuals = [], []
    for root in npoly.polyroots(coeffs):
        z = complex(root)
        for _ in range(8):
            slope = npoly.polyval(z, deriv)
            if slope == 0:
                break
            z = z - npoly.polyval(z, coeffs) / slope
        if abs(abs(z) - 1.0) > 1e-6:
            continue
        z = z / abs(z)
        residual = abs(npoly.polyval(z, coeffs))
        if residual < accept_tol:
            angle = _wrap(math.atan2(z.imag, z.real))
            if all(_angle_gap((angle,), pt) >= DEFAULT_ZEROSET_PARAMS["DEDUP_TOL"] for pt in points):
                points.append((angle,))
                residuals.append(float(residual))
    if not points:
        return TorusZeroClass("empty")
    order = np.argsort([pt[0] for pt in points])
    return TorusZeroClass("finite", points=[points[i] for i in order], residuals=[residuals[i] for i in order])


def sample_offtorus_zeros(p: BivariateSeries, n_samples: int = 64, seed: int = 0) -> np.ndarray:
    """Zeros (z1, z2) of p with z2 drawn off the unit circle, z1 from slice roots."""
    rng = np.random.default_rng(seed)
    q = trim(p)
    inside = rng.uniform(0.05, 0.95, size=n_samples // 2)
    outside = rng.uniform(1.05, 3.0, size=n_samples - n_samples // 2)
    radii = np.concatenate([inside, outside])
    z2 = radii * np.exp(1j * rng.uniform(0.0, TWO_PI, size=n_samples))
    roots, _ = _batched_roots(_slice_matrix(q.coeffs, z2))
    pairs = [(complex(root), complex(b)) for b, row in zip(z2, roots) for root in row]
    return np.array(pairs, dtype=np.complex128).reshape(-1, 2)


def offtorus_containment(zeros: np.ndarray, tol: float = 1e-9) -> bool:
    """Every sampled zero off the torus has one coordinate inside and one outside the disk."""
    for z1, z2 in np.asarray(zeros).reshape(-1, 2):
        m1, m2 = abs(z1), abs(z2)
        if abs(m1 - 1.0) < tol and abs(m2 - 1.0) < tol:
            continue
        if not (max(m1, m2) > 1.0 and min(m1, m2) < 1.0):
            return False
    return True


# ----------------------------------------------------------- #
#                         Stability                           #
# ----------------------------------------------------------- #

def _slice_sweep(q: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, int, List[np.ndarray], np.ndarray]:
    """Min root modulus per slice (inf without roots, 0 when the slice vanishes identically)."""
    coeff_rows = _slice_matrix(q, values)
    roots, effective = _batched_roots(coeff_rows)
    m = q.shape[0] - 1
    min_mod = np.array([float(np.min(np.abs(r))) if r.size else math.inf for r in roots])
    min_mod[effective < 0] = 0.0
    degenerate = int(np.count_nonzero(effective < m))
    return min_mod, degenerate, roots, effective


def stability_check(
    p: BivariateSeries,
    radial_n: int = DEFAULT_ZEROSET_PARAMS["STABILITY_RADIAL_N"],
    angular_n: int = DEFAULT_ZEROSET_PARAMS["STABILITY_ANGULAR_N"],
    *,
    tol: float = DEFAULT_ZEROSET_PARAMS["STABILITY_TOL"],
) -> StabilityReport:
    """Search for zeros of p in the open bidisk by sweeping z2 over the closed disk.

    Each slice p(., z2) is solved through its companion matrix; a root of
    modulus below 1 - tol at |z2| < 1 is a witness (Newton-polished). Slices
    whose leading coefficient vanishes are solved at their lower degree and
    counted. The |z2| = 1 slices and the transposed sweep over |z1| = 1 give
    the side conditions on (D x T) and (T x D).
    """
    q = trim(p)
    if bidegree(q) == (0, 0):
        verdict = "zero_free" if q.constant_term != 0 else "zero_found"
        witness = None if verdict == "zero_free" else (0j, 0j)
        return StabilityReport(verdict, witness=witness, side_conditions={"disk_times_torus": verdict == "zero_free",
                                                                          "torus_times_disk": verdict == "zero_free"})
    swapped = bidegree(q)[0] == 0
    work = swap_variables(q) if swapped else q
    coeffs = work.coeffs

    radii = np.linspace(0.0, 1.0, radial_n)
    angles = TWO_PI * np.arange(angular_n) / angular_n
    z2 = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    min_mod, degenerate, roots, effective = _slice_sweep(coeffs, z2)
    slice_issue = None
    if degenerate:
        dropped = np.nonzero(effective < coeffs.shape[0] - 1)[0]
        slice_issue = DegenerateSlice(
            f"{degenerate} sweep slices dropped degree (leading coefficient vanishes)",
            details={"count": degenerate, "swept": "z1" if swapped else "z2",
                     "slices": [[float(z2[i].real), float(z2[i].imag)] for i in dropped[:8]]},
        )
        logger.warning(str(slice_issue))
    grid_min = min_mod.reshape(radial_n, angular_n)
    interior = np.abs(z2) < 1.0 - 1e-15
    per_radius = [float(v) for v in grid_min.min(axis=1)]

    witness = None
    interior_min = float(min_mod[interior].min()) if np.any(interior) else math.inf
    if interior_min < 1.0 - tol:
        idx = int(np.argmin(np.where(interior, min_mod, np.inf)))
        b = complex(z2[idx])
        if effective[idx] < 0:
            a = 0j
        else:
            a = complex(roots[idx][int(np.argmin(np.abs(roots[idx])))])
            a = _newton_z1(work, partial_derivative(work, axis=0), a, b)
        witness = (b, a) if swapped else (a, b)
        logger.debug(f"interior zero witness {witness}, |p|={abs(evaluate(q, *witness)):.3g}")

    boundary = ~interior
    torus_ok = bool(np.all(min_mod[boundary] >= 1.0 - tol))
    # transposed sweep: roots in the other variable with the swept one on the circle
    other = swap_variables(work).coeffs
    if other.shape[0] > 1:
        circle = np.exp(1j * angles)
        other_min, _, _, _ = _slice_sweep(other, circle)
        other_ok = bool(np.all(other_min >= 1.0 - tol))
    else:
        # no dependence on that variable: p(z1, .) is constant, zero only where the slice vanishes
        other_ok = bool(np.all(np.abs(npoly.polyval(np.exp(1j * angles), coeffs[:, 0])) > tol))
    sides = {"disk_times_torus": torus_ok, "torus_times_disk": other_ok}
    if swapped:
        sides = {"disk_times_torus": other_ok, "torus_times_disk": torus_ok}

    return StabilityReport(
        verdict="zero_free" if witness is None else "zero_found",
        witness=witness,
        min_root_modulus=interior_min,
        per_radius_min=per_radius,
        degenerate_slices=degenerate,
        side_conditions=sides,
        swapped=swapped,
        slice_issue=slice_issue,
    )


# ----------------------------------------------------------- #
#                       Irreducibility                        #
# ----------------------------------------------------------- #

def _common_root(polys: List[np.ndarray], tol: float = 1e-8) -> Optional[complex]:
    """A root shared by every one-variable polynomial in the list, if any."""
    nonzero = [npoly.polytrim(c, tol=0.0) for c in polys if np.any(c)]
    if not nonzero:
        return None
    base = min(nonzero, key=lambda c: c.size)
    if base.size < 2:
        return None
    for root in npoly.polyroots(base):
        scale = max(1.0, abs(root))
        if all(abs(npoly.polyval(root, c)) <= tol * float(np.sum(np.abs(c))) * scale ** (c.size - 1)
               for c in nonzero):
            return complex(root)
    return None


def _linear_factor_text(root: complex, variable: str) -> str:
    if abs(root.imag) < 1e-12:
        value = root.real
        return f"1 - {variable}" if abs(value - 1.0) < 1e-12 else f"1 - {1.0 / value!r}*{variable}"
    return f"1 - ({1.0 / root!r})*{variable}"


def heuristic_irreducibility(
    p: BivariateSeries,
    *,
    seed: int = 0,
    trials: int = DEFAULT_ZEROSET_PARAMS["IRREDUCIBILITY_TRIALS"],
) -> Dict[str, Any]:
    """irreducible | reducible | unknown for p over the complex numbers, with a factor hint."""
    q = trim(p).coeffs
    m, n = q.shape[0] - 1, q.shape[1] - 1
    if m == 0 and n == 0:
        return {"verdict": "unknown", "factor_hint": None, "reason": "constant"}

    nonzero = np.argwhere(q != 0)
    if nonzero[:, 0].min() > 0 and (m, n) != (1, 0):
        return {"verdict": "reducible", "factor_hint": "z1", "reason": "monomial factor"}
    if nonzero[:, 1].min() > 0 and (m, n) != (0, 1):
        return {"verdict": "reducible", "factor_hint": "z2", "reason": "monomial factor"}

    if n == 0 or m == 0:
        coeffs = q[:, 0] if n == 0 else q[0, :]
        variable = "z1" if n == 0 else "z2"
        if coeffs.size - 1 == 1:
            return {"verdict": "irreducible", "factor_hint": None, "reason": "degree one"}
        root = complex(npoly.polyroots(coeffs)[0])
        return {"verdict": "reducible", "factor_hint": _linear_factor_text(root, variable),
                "reason": "one-variable polynomial of degree > 1"}

    root = _common_root([q[:, l] for l in range(n + 1)])
    if root is not None and abs(root) > 0:
        return {"verdict": "reducible", "factor_hint": _linear_factor_text(root, "z1"),
                "reason": "one-variable factor in z1"}
    root = _common_root([q[k, :] for k in range(m + 1)])
    if root is not None and abs(root) > 0:
        return {"verdict": "reducible", "factor_hint": _linear_factor_text(root, "z2"),
                "reason": "one-variable factor in z2"}

    if m == 1 or n == 1:
        return {"verdict": "irreducible", "factor_hint": None,
                "reason": "degree one in a variable without one-variable factors"}

    rng = np.random.default_rng(seed)
    repeated = 0
    for _ in range(trials):
        c = complex(rng.uniform(0.3, 0.9) * np.exp(1j * rng.uniform(0.0, TWO_PI)))
        slice_coeffs = npoly.polyval(c, q.T)
        if abs(slice_coeffs[-1]) < 1e-12 * float(np.abs(slice_coeffs).max()):
            continue
        roots = npoly.polyroots(slice_coeffs)
        gaps = np.abs(roots[:, None] - roots[None, :]) + np.eye(roots.size)
        if float(gaps.min()) < 1e-6:
            repeated += 1
    if repeated == trials:
        return {"verdict": "reducible", "factor_hint": None, "reason": "repeated factor on every specialization"}
    return {"verdict": "unknown", "factor_hint": None, "reason": "specializations squarefree; no factor found"}


# ----------------------------------------------------------- #
#                          Reports                            #
# ----------------------------------------------------------- #

def zeroset_report(
    p: BivariateSeries,
    grid_n: int = DEFAULT_ZEROSET_PARAMS["TORUS_GRID_N"],
    radial_n: int = DEFAULT_ZEROSET_PARAMS["STABILITY_RADIAL_N"],
    angular_n: int = DEFAULT_ZEROSET_PARAMS["STABILITY_ANGULAR_N"],
    *,
    irreducible: Optional[bool] = None,
    seed: int = 0,
) -> Dict[str, Any]:
    """JSON-ready combination of torus class, stability and irreducibility evidence."""
    q = trim(p)
    uses_z1, uses_z2 = depends_on(q)
    if uses_z1 != uses_z2:
        torus = face_zero_search(q)
        torus_dict = torus.to_dict()
        torus_dict["face"] = "z1" if uses_z1 else "z2"
    else:
        try:
            torus_dict = torus_zero_search(q, grid_n).to_dict()
        except ResolutionWarning as exc:
            logger.warning(f"torus zero set unresolved at grid_n={grid_n}: {exc}")
            torus_dict = {"class": "unresolved", "points": [], "residuals": [],
                          "resolution_issue": dict(exc.details, message=str(exc))}
    stability = stability_check(q, radial_n, angular_n)
    irreducibility = heuristic_irreducibility(q, seed=seed)
    if irreducible is None and irreducibility["verdict"] != "irreducible" and uses_z1 and uses_z2:
        torus_dict["conditional"] = True
    report = {"polynomial": format_polynomial(q)}
    report.update(torus_dict)
    report.update(stability.to_dict())
    report["irreducibility"] = irreducibility
    return report
