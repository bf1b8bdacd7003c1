"""Branch functions h_j(z2) = 1 / (z1-roots of p(., z2)): singular set, continuation, Hopf ratios, exponents.

Writing p(z1, z2) = sum_k A_k(z2) z1^k with m = deg_z1 p, the z1-roots of
p(., z2) are 1 / h_j(z2); roots escaping to infinity (A_m(z2) -> 0) give
h_j = 0. Root matching between nearby z2 values uses the chordal metric on
the Riemann sphere so that these escapes need no special case.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import optimize, stats
from scipy.stats import qmc

from shared_tools.lab_errors import DegenerateInput, MatchingAmbiguity, ParameterOutOfRange
from shared_tools.series_core import BivariateSeries, bidegree, evaluate, partial_derivative, trim

logger = logging.getLogger(__name__)

DEFAULT_BRANCH_PARAMS = {
    "SINGULAR_CLUSTER_TOL": 1e-4,
    "PATH_STEP_FACTOR": 0.1,
    "PATH_MAX_STEP": 0.05,
    "PATH_MIN_CLEARANCE": 1e-3,
    "MATCH_AMBIGUITY_TOL": 1e-9,
    "HOPF_SAMPLE_N": 2048,
    "HOPF_EXCLUSION": 1e-2,
    "EXPONENT_RADII": (1e-1, 1e-2, 1e-3, 1e-4, 1e-5),
    "EXPONENT_STEP_FACTOR": 1e-3,
    "NO_BLOWUP_SLOPE": -0.05,
}


# ----------------------------------------------------------- #
#                       Root helpers                          #
# ----------------------------------------------------------- #

def _z1_coefficients(q: np.ndarray, z2: complex) -> np.ndarray:
    return npoly.polyval(complex(z2), q.T)


def z1_roots(q: np.ndarray, z2: complex, tol: float = 1e-12) -> np.ndarray:
    """All m roots of p(., z2) on the sphere; lost degree shows up as inf entries."""
    m = q.shape[0] - 1
    coeffs = _z1_coefficients(q, z2)
    scale = float(np.max(np.abs(coeffs)))
    if scale == 0.0:
        raise DegenerateInput(f"p(., {z2}) vanishes identically")
    significant = np.nonzero(np.abs(coeffs) > tol * scale)[0]
    degree = int(significant.max())
    finite = npoly.polyroots(coeffs[:degree + 1]) if degree > 0 else np.empty(0, dtype=np.complex128)
    out = np.full(m, np.inf + 0j, dtype=np.complex128)
    out[:finite.size] = finite
    return out


def chordal(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Chordal distance on the Riemann sphere, broadcasting; inf is the north pole."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    a_inf, b_inf = ~np.isfinite(a), ~np.isfinite(b)
    a0 = np.where(a_inf, 0.0, a)
    b0 = np.where(b_inf, 0.0, b)
    both = np.abs(a0 - b0) / np.sqrt((1.0 + np.abs(a0) ** 2) * (1.0 + np.abs(b0) ** 2))
    only_a = 1.0 / np.sqrt(1.0 + np.abs(b0) ** 2)
    only_b = 1.0 / np.sqrt(1.0 + np.abs(a0) ** 2)
    return np.where(a_inf & b_inf, 0.0, np.where(a_inf, only_a, np.where(b_inf, only_b, both)))


def _h_from_roots(roots: np.ndarray) -> np.ndarray:
    out = np.zeros(roots.shape, dtype=np.complex128)
    finite = np.isfinite(roots)
    out[finite] = 1.0 / roots[finite]
    return out


# ----------------------------------------------------------- #
#                        Singular set                         #
# ----------------------------------------------------------- #

@dataclass
class SingularPoint:
    value: complex
    tag: str
    residual: float = 0.0


@dataclass
class SingularSet:
    points: List[SingularPoint] = field(default_factory=list)
    discriminant: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.complex128))

    @property
    def values(self) -> np.ndarray:
        return np.array([pt.value for pt in self.points], dtype=np.complex128)

    def distance(self, z: complex) -> float:
        if not self.points:
            return math.inf
        return float(np.min(np.abs(self.values - complex(z))))

    def to_dict(self) -> Dict[str, Any]:
        return {"points": [{"value": [pt.value.real, pt.value.imag], "tag": pt.tag, "residual": pt.residual}
                           for pt in self.points]}


def _sylvester_resultant(f: np.ndarray, g: np.ndarray) -> complex:
    """Res(f, g) for coefficient lists (lowest power first) of formal degrees len-1."""
    m, n = f.size - 1, g.size - 1
    size = m + n
    if size == 0:
        return complex(1.0)
    sylvester = np.zeros((size, size), dtype=np.complex128)
    for i in range(n):
        sylvester[i, i:i + m + 1] = f[::-1]
    for i in range(m):
        sylvester[n + i, i:i + n + 1] = g[::-1]
    return complex(np.linalg.det(sylvester))


def discriminant_coefficients(p: BivariateSeries) -> np.ndarray:
    """Coefficients in z2 of Res_z1(p, dp/dz1), by evaluation on roots of unity and FFT."""
    q = trim(p).coeffs
    m, n = q.shape[0] - 1, q.shape[1] - 1
    if m < 1:
        return np.ones(1, dtype=np.complex128)
    dq = npoly.polyder(q, axis=0)
    count = (2 * m - 1) * n + 1
    nodes = np.exp(2j * np.pi * np.arange(count) / count)
    values = np.array([
        _sylvester_resultant(_z1_coefficients(q, z), _z1_coefficients(dq, z)) for z in nodes
    ])
    coeffs = np.fft.fft(values) / count
    top = float(np.max(np.abs(coeffs)))
    if top == 0.0:
        return np.zeros(1, dtype=np.complex128)
    coeffs[np.abs(coeffs) < 1e-11 * top] = 0.0
    return npoly.polytrim(coeffs, tol=0.0)


def _polish_branch_point(q: np.ndarray, z1: complex, z2: complex, steps: int = 30) -> Tuple[complex, complex, float]:
    """Newton on (p, dp/dz1) = (0, 0) in (z1, z2)."""
    p = BivariateSeries(q)
    p1 = partial_derivative(p, axis=0)
    p2 = partial_derivative(p, axis=1)
    p11 = partial_derivative(p1, axis=0)
    p12 = partial_derivative(p1, axis=1)
    for _ in range(steps):
        F = np.array([evaluate(p, z1, z2), evaluate(p1, z1, z2)])
        if float(np.max(np.abs(F))) < 1e-15:
            break
        J = np.array([[evaluate(p1, z1, z2), evaluate(p2, z1, z2)],
                      [evaluate(p11, z1, z2), evaluate(p12, z1, z2)]])
        try:
            delta = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        z1, z2 = z1 + delta[0], z2 + delta[1]
    residual = max(abs(evaluate(p, z1, z2)), abs(evaluate(p1, z1, z2)))
    return complex(z1), complex(z2), float(residual)


def _common_roots(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> List[complex]:
    a = npoly.polytrim(a, tol=0.0)
    b = npoly.polytrim(b, tol=0.0)
    if not np.any(b):
        return [complex(r) for r in npoly.polyroots(a)] if a.size > 1 else []
    if not np.any(a):
        return [complex(r) for r in npoly.polyroots(b)] if b.size > 1 else []
    base, other = (a, b) if a.size <= b.size else (b, a)
    if base.size < 2:
        return []
    scale = float(np.sum(np.abs(other)))
    return [complex(r) for r in npoly.polyroots(base)
            if abs(npoly.polyval(r, other)) <= tol * scale * max(1.0, abs(r)) ** (other.size - 1)]


def singular_set(p: BivariateSeries, cluster_tol: float = DEFAULT_BRANCH_PARAMS["SINGULAR_CLUSTER_TOL"]) -> SingularSet:
    """Branch points (finite double z1-roots) and leading degenerations A_m = A_(m-1) = 0."""
    q = trim(p).coeffs
    m, n = q.shape[0] - 1, q.shape[1] - 1
    if n == 0:
        raise DegenerateInput("p does not depend on z2; its singular set is empty by convention")
    if m == 0:
        logger.warning("p does not depend on z1; there are no branch functions.")
        return SingularSet()

    points: List[SingularPoint] = []

    def already_listed(value: complex) -> bool:
        return any(abs(value - pt.value) < cluster_tol for pt in points)

    a_m = q[m, :]
    a_prev = q[m - 1, :]
    for value in _common_roots(a_m, a_prev):
        if not already_listed(value):
            points.append(SingularPoint(value, "leading-degeneration", 0.0))

    disc = discriminant_coefficients(p)
    if disc.size > 1:
        disc_scale = float(np.max(np.abs(disc)))
        lead_scale = float(np.sum(np.abs(a_m)))
        dq = npoly.polyder(q, axis=0)
        for root in npoly.polyroots(disc):
            a = complex(root)
            if already_listed(a):
                continue
            if abs(npoly.polyval(a, a_m)) <= 1e-6 * lead_scale * max(1.0, abs(a)) ** n:
                # only a root escaping to infinity, not a finite collision
                continue
            roots = npoly.polyroots(_z1_coefficients(q, a))
            crit = npoly.polyroots(_z1_coefficients(dq, a)) if m > 1 else np.zeros(1)
            gaps = np.abs(roots[:, None] - crit[None, :])
            i, _ = np.unravel_index(int(np.argmin(gaps)), gaps.shape)
            z1, z2, residual = _polish_branch_point(q, complex(roots[i]), a)
            if residual > 1e-8 or abs(z2 - a) > cluster_tol:
                logger.debug(f"discriminant root {a} did not polish to a branch point (residual {residual:.3g})")
                continue
            disc_residual = abs(npoly.polyval(z2, disc)) / disc_scale
            if not already_listed(z2):
                points.append(SingularPoint(z2, "branch", float(disc_residual)))
    else:
        disc_scale = 0.0

    if disc.size == 1 and disc_scale == 0.0 and not np.any(disc):
        logger.warning("discriminant vanishes identically: p has a repeated factor.")
    points.sort(key=lambda pt: (abs(pt.value), pt.value.real, pt.value.imag))
    return SingularSet(points=points, discriminant=disc)


# ----------------------------------------------------------- #
#                          Paths                              #
# ----------------------------------------------------------- #

def circle_path(center: complex, radius: float, n: int = 256) -> np.ndarray:
    """Closed counter-clockwise polygon; the last vertex repeats the first."""
    angles = 2.0 * np.pi * np.arange(n + 1) / n
    path = complex(center) + float(radius) * np.exp(1j * angles)
    path[-1] = path[0]
    return path


def ray_path(start: complex, end: complex, n: int = 64) -> np.ndarray:
    return np.linspace(complex(start), complex(end), n + 1)


# ----------------------------------------------------------- #
#                        Continuation                         #
# ----------------------------------------------------------- #

@dataclass
class BranchTrack:
    nodes: np.ndarray
    values: np.ndarray
    monodromy: Optional[Tuple[int, ...]] = None
    singular: Optional[SingularSet] = None

    @property
    def closed(self) -> bool:
        return self.monodromy is not None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "nodes": [[z.real, z.imag] for z in self.nodes],
            "branches": [[[h.real, h.imag] for h in column] for column in self.values.T],
        }
        if self.monodromy is not None:
            out["monodromy"] = [i + 1 for i in self.monodromy]
        if self.singular is not None:
            out["singular_set"] = self.singular.to_dict()["points"]
        return out


def _match(previous: np.ndarray, current: np.ndarray, ambiguity_tol: float) -> Tuple[np.ndarray, float]:
    """Permutation sigma with current[sigma[i]] continuing previous[i], and the worst matched distance."""
    cost = chordal(previous[:, None], current[None, :])
    rows, cols = optimize.linear_sum_assignment(cost)
    order = cols[np.argsort(rows)]
    m = previous.size
    if 1 < m <= 6:
        best = float(cost[np.arange(m), order].sum())
        for perm in itertools.permutations(range(m)):
            perm_arr = np.array(perm)
            if np.array_equal(perm_arr, order):
                continue
            total = float(cost[np.arange(m), perm_arr].sum())
            if total - best < ambiguity_tol:
                moved = float(np.max(chordal(current[order], current[perm_arr])))
                if moved > ambiguity_tol:
                    raise MatchingAmbiguity(
                        "two root pairings cost the same; refine the path step",
                        details={"cost": best, "alternative": total},
                    )
    return order, float(np.max(cost[np.arange(m), order])) if m else 0.0


def _min_separation(roots: np.ndarray) -> float:
    if roots.size < 2:
        return math.inf
    gaps = chordal(roots[:, None], roots[None, :]) + np.eye(roots.size) * 10.0
    return float(gaps.min())


def track_branches(
    p: BivariateSeries,
    path: Sequence[complex],
    *,
    singular: Optional[SingularSet] = None,
    step_factor: float = DEFAULT_BRANCH_PARAMS["PATH_STEP_FACTOR"],
    max_step: float = DEFAULT_BRANCH_PARAMS["PATH_MAX_STEP"],
    min_clearance: float = DEFAULT_BRANCH_PARAMS["PATH_MIN_CLEARANCE"],
    ambiguity_tol: float = DEFAULT_BRANCH_PARAMS["MATCH_AMBIGUITY_TOL"],
) -> BranchTrack:
    """Continue all branches along a polyline, stepping at most step_factor x distance to S.

    If the polyline is closed, the monodromy permutation maps each branch
    to the index of the starting branch it ends on.
    """
    q = trim(p).coeffs
    vertices = np.asarray(list(path), dtype=np.complex128)
    if vertices.size < 2:
        raise ParameterOutOfRange("a path needs at least two vertices")
    if singular is None:
        try:
            singular = singular_set(p)
        except DegenerateInput:
            singular = SingularSet()
    for z in vertices:
        if singular.distance(z) < min_clearance:
            raise ParameterOutOfRange(f"path vertex {z} is closer than {min_clearance} to the singular set")

    start_roots = z1_roots(q, vertices[0])
    current = start_roots.copy()
    nodes = [complex(vertices[0])]
    tracked = [current.copy()]

    for a, b in zip(vertices[:-1], vertices[1:]):
        position = complex(a)
        target = complex(b)
        while abs(target - position) > 1e-15:
            clearance = singular.distance(position)
            step = min(max_step, step_factor * clearance, abs(target - position))
            for _ in range(40):
                nxt = position + step * (target - position) / abs(target - position)
                candidate = z1_roots(q, nxt)
                order, worst = _match(current, candidate, ambiguity_tol)
                if worst <= 0.5 * _min_separation(candidate) or step < 1e-12:
                    break
                step /= 2.0
            if singular.distance(nxt) < min_clearance:
                raise ParameterOutOfRange(f"path passes within {min_clearance} of the singular set near {nxt}")
            current = candidate[order]
            position = nxt
            nodes.append(position)
            tracked.append(current.copy())

    monodromy = None
    if abs(vertices[-1] - vertices[0]) < 1e-12:
        order, _ = _match(current, start_roots, ambiguity_tol)
        monodromy = tuple(int(i) for i in order)
    return BranchTrack(nodes=np.array(nodes), values=_h_from_roots(np.array(tracked)),
                       monodromy=monodromy, singular=singular)


def compose_permutations(first: Sequence[int], second: Sequence[int]) -> Tuple[int, ...]:
    """Monodromy of traversing ``first`` then ``second`` (0-based one-line notation)."""
    return tuple(int(second[i]) for i in first)


def track_residual(p: BivariateSeries, track: BranchTrack) -> float:
    """Max chordal gap between tracked 1/h values and fresh companion roots at every node."""
    q = trim(p).coeffs
    worst = 0.0
    for z, h in zip(track.nodes, track.values):
        roots = np.where(h == 0, np.inf + 0j, 1.0 / np.where(h == 0, 1.0, h))
        fresh = z1_roots(q, z)
        cost = chordal(roots[:, None], fresh[None, :])
        rows, cols = optimize.linear_sum_assignment(cost)
        worst = max(worst, float(cost[rows, cols].max()))
    return worst


# ----------------------------------------------------------- #
#                    Hopf ratio, multiplicity                 #
# ----------------------------------------------------------- #

def _disk_samples(sample_n: int, seed: int) -> np.ndarray:
    sampler = qmc.Halton(d=2, scramble=True, seed=seed)
    u = sampler.random(sample_n)
    return np.sqrt(u[:, 0]) * np.exp(2j * np.pi * u[:, 1])


def multiplicity(p: BivariateSeries, value: complex, tol: float = 1e-12) -> int:
    """Number of z2 in the disk with h_k(z2) = value for some k (z2-roots of p(1/value, .))."""
    q = trim(p).coeffs
    value = complex(value)
    if value == 0:
        coeffs = q[-1, :]
    else:
        coeffs = npoly.polyval(1.0 / value, q)
    coeffs = npoly.polytrim(coeffs, tol=tol * float(np.max(np.abs(coeffs))) if np.any(coeffs) else 0.0)
    if coeffs.size < 2:
        return 0
    return int(np.count_nonzero(np.abs(npoly.polyroots(coeffs)) < 1.0))


def multiplicity_bound(p: BivariateSeries, values: Optional[Sequence[complex]] = None, *, seed: int = 0,
                       n_values: int = 16) -> int:
    """Largest preimage count over sampled values in the disk (at most the z2-degree)."""
    if values is None:
        values = _disk_samples(n_values, seed) * 0.95
    return max((multiplicity(p, v) for v in values), default=0)


def hopf_ratio(
    p: BivariateSeries,
    sample_n: int = DEFAULT_BRANCH_PARAMS["HOPF_SAMPLE_N"],
    *,
    seed: int = 0,
    exclusion: float = DEFAULT_BRANCH_PARAMS["HOPF_EXCLUSION"],
    singular: Optional[SingularSet] = None,
) -> Dict[str, Any]:
    """min over samples and branches of (1 - |h_k(z2)|^2) / (1 - |z2|^2)."""
    q = trim(p).coeffs
    if singular is None:
        try:
            singular = singular_set(p)
        except DegenerateInput:
            singular = SingularSet()
    samples = _disk_samples(sample_n, seed)
    keep = np.array([singular.distance(z) >= exclusion for z in samples], dtype=bool)
    samples = samples[keep & (np.abs(samples) < 1.0 - 1e-12)]

    min_ratio, argmin, max_abs_h = math.inf, None, 0.0
    for z in samples:
        h = _h_from_roots(z1_roots(q, z))
        ratios = (1.0 - np.abs(h) ** 2) / (1.0 - abs(z) ** 2)
        k = int(np.argmin(ratios))
        if ratios[k] < min_ratio:
            min_ratio, argmin = float(ratios[k]), complex(z)
        max_abs_h = max(max_abs_h, float(np.max(np.abs(h))) if h.size else 0.0)
    return {
        "min_ratio": min_ratio,
        "argmin": [argmin.real, argmin.imag] if argmin is not None else None,
        "max_abs_h": max_abs_h,
        "samples_used": int(samples.size),
        "multiplicity": multiplicity_bound(p, seed=seed),
        "z2_degree": int(q.shape[1] - 1),
    }


# ----------------------------------------------------------- #
#                      Branch exponents                       #
# ----------------------------------------------------------- #

def branch_exponent(
    p: BivariateSeries,
    a: complex,
    radii: Sequence[float] = DEFAULT_BRANCH_PARAMS["EXPONENT_RADII"],
    *,
    direction: Optional[complex] = None,
    step_factor: float = DEFAULT_BRANCH_PARAMS["EXPONENT_STEP_FACTOR"],
    no_blowup_slope: float = DEFAULT_BRANCH_PARAMS["NO_BLOWUP_SLOPE"],
) -> Dict[str, Any]:
    """Least-squares slope of log max_j |h_j'| against log |z2 - a| along a ray into a.

    The ray points from a toward the origin (direction 1 when a = 0).
    Derivatives are centred differences with step step_factor x radius,
    branches matched across the three evaluation points.
    """
    q = trim(p).coeffs
    a = complex(a)
    if direction is None:
        direction = -a / abs(a) if abs(a) > 0 else 1.0 + 0j
    direction = complex(direction) / abs(complex(direction))
    rho = np.asarray(sorted(radii, reverse=True), dtype=np.float64)
    derivs = []
    for r in rho:
        z = a + r * direction
        dz = step_factor * r * direction
        centre = z1_roots(q, z)
        before = z1_roots(q, z - dz)
        after = z1_roots(q, z + dz)
        order_b, _ = _match(centre, before, 0.0)
        order_a, _ = _match(centre, after, 0.0)
        h_b = _h_from_roots(before[order_b])
        h_a = _h_from_roots(after[order_a])
        derivs.append(float(np.max(np.abs(h_a - h_b) / abs(2.0 * dz))))
    derivs = np.asarray(derivs)
    result = stats.linregress(np.log(rho), np.log(np.maximum(derivs, 1e-300)))
    slope = float(result.slope)
    return {
        "point": [a.real, a.imag],
        "slope": slope,
        "r_squared": float(result.rvalue ** 2),
        "radii": rho.tolist(),
        "derivatives": derivs.tolist(),
        "note": "no_blowup" if slope >= no_blowup_slope else "blowup",
    }


def reflected_branches(p: BivariateSeries, samples: Sequence[complex]) -> Dict[str, Any]:
    """Points b with p(1/z2, b) = 0 for z2 in the disk; checks h_k(b) = z2 and |b| < 1."""
    q = trim(p).coeffs
    m = q.shape[0] - 1
    worst_relation, max_abs_b, checked = 0.0, 0.0, 0
    for z2 in samples:
        z2 = complex(z2)
        if z2 == 0 or abs(z2) >= 1.0:
            continue
        # z2^m p(1/z2, zeta) as a polynomial in zeta
        coeffs = np.array([sum(q[k, l] * z2 ** (m - k) for k in range(m + 1)) for l in range(q.shape[1])])
        coeffs = npoly.polytrim(coeffs, tol=0.0)
        if coeffs.size < 2:
            continue
        for b in npoly.polyroots(coeffs):
            h = _h_from_roots(z1_roots(q, b))
            worst_relation = max(worst_relation, float(np.min(np.abs(h - z2))))
            max_abs_b = max(max_abs_b, abs(b))
            checked += 1
    return {"checked": checked, "max_relation_residual": worst_relation,
            "max_abs_b": max_abs_b, "inside_disk": bool(max_abs_b < 1.0)}
