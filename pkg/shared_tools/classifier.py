"""Cyclicity verdicts for polynomials in the anisotropic Dirichlet spaces, with empirical cross-checks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from shared_tools.approximants import DEFAULT_APPROX_PARAMS, decay_fit, distance_sequence, natural_shape
from shared_tools.lab_errors import DegenerateInput, Inconclusive, NumericalBreakdown, ResolutionWarning
from shared_tools.series_core import (
    BivariateSeries,
    bidegree,
    depends_on,
    is_zero,
    polynomial_product,
    subtract,
    trim,
)
from shared_tools.series_io import format_polynomial
from shared_tools.shared_utils import map_parallel
from shared_tools.spaces import WeightPair
from shared_tools.zerosets import (
    DEFAULT_ZEROSET_PARAMS,
    StabilityReport,
    TorusZeroClass,
    face_zero_search,
    heuristic_irreducibility,
    stability_check,
    torus_zero_search,
)

logger = logging.getLogger(__name__)

VERDICTS = ("cyclic", "not_cyclic", "out_of_theorem_scope")
BOUNDARY_TOL = 1e-12
LATTICE_AXIS = tuple(float(a) for a in np.linspace(-2.0, 2.5, 7))


# ----------------------------------------------------------- #
#                          Evidence                           #
# ----------------------------------------------------------- #

@dataclass
class PolynomialEvidence:
    """Everything about p that does not depend on the weight pair."""

    polynomial: BivariateSeries
    stability: StabilityReport
    torus: Optional[TorusZeroClass]
    irreducibility: Dict[str, Any]
    irreducible_asserted: bool = False
    resolution_issue: Optional[str] = None

    @property
    def uses(self):
        return depends_on(self.polynomial)

    @property
    def irreducible(self) -> Optional[bool]:
        if self.irreducible_asserted:
            return True
        verdict = self.irreducibility.get("verdict")
        if verdict == "irreducible":
            return True
        if verdict == "reducible":
            return False
        return None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "polynomial": format_polynomial(self.polynomial),
            "bidegree": list(bidegree(self.polynomial)),
            "stability": self.stability.to_dict(),
            "irreducibility": dict(self.irreducibility, asserted=self.irreducible_asserted),
        }
        if self.torus is not None:
            out["torus"] = self.torus.to_dict()
        if self.resolution_issue:
            out["resolution_issue"] = self.resolution_issue
        return out


def analyze_polynomial(
    p: BivariateSeries,
    *,
    irreducible: Optional[bool] = None,
    grid_n: int = DEFAULT_ZEROSET_PARAMS["TORUS_GRID_N"],
    radial_n: int = DEFAULT_ZEROSET_PARAMS["STABILITY_RADIAL_N"],
    angular_n: int = DEFAULT_ZEROSET_PARAMS["STABILITY_ANGULAR_N"],
    seed: int = 0,
) -> PolynomialEvidence:
    q = trim(p)
    if is_zero(q):
        raise DegenerateInput("the zero polynomial has no cyclicity verdict")
    stability = stability_check(q, radial_n, angular_n)
    irreducibility = heuristic_irreducibility(q, seed=seed)
    if irreducible is False:
        irreducibility = dict(irreducibility, verdict="reducible", reason="asserted reducible")

    torus: Optional[TorusZeroClass] = None
    issue = None
    uses_z1, uses_z2 = depends_on(q)
    if uses_z1 and uses_z2:
        try:
            torus = torus_zero_search(q, grid_n)
        except ResolutionWarning as exc:
            issue = str(exc)
            logger.warning(f"torus zero set unresolved at grid_n={grid_n}: {exc}")
    elif uses_z1 or uses_z2:
        torus = face_zero_search(q)
    else:
        torus = TorusZeroClass("empty")
    return PolynomialEvidence(q, stability, torus, irreducibility,
                              irreducible_asserted=bool(irreducible), resolution_issue=issue)


# ----------------------------------------------------------- #
#                          Verdicts                           #
# ----------------------------------------------------------- #

@dataclass
class CyclicityVerdict:
    verdict: str
    rule: str
    weights: WeightPair
    evidence: Dict[str, Any] = field(default_factory=dict)
    conditional_verdict: Optional[str] = None
    factors: List["CyclicityVerdict"] = field(default_factory=list)
    cross_check: Optional[Dict[str, Any]] = None

    @property
    def cyclic(self) -> bool:
        return self.verdict == "cyclic"

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "verdict": self.verdict,
            "rule": self.rule,
            "alpha": self.weights.as_list(),
            "evidence": self.evidence,
        }
        if self.conditional_verdict is not None:
            out["conditional_verdict"] = self.conditional_verdict
        if self.factors:
            out["factors"] = [f.to_dict() for f in self.factors]
        if self.cross_check is not None:
            out["cross_check"] = self.cross_check
        return out


def theorem_region(zero_class: str, w: WeightPair) -> tuple:
    """(verdict, rule) for an irreducible zero-free p in both variables with the given torus class."""
    if w.total <= 1.0 + BOUNDARY_TOL:
        return "cyclic", "theorem-case-1"
    if w.minimum <= 1.0 + BOUNDARY_TOL:
        return ("cyclic" if zero_class in ("empty", "finite") else "not_cyclic"), "theorem-case-2"
    return ("cyclic" if zero_class == "empty" else "not_cyclic"), "theorem-case-3"


def _one_variable_verdict(evidence: PolynomialEvidence, w: WeightPair) -> tuple:
    uses_z1, _ = evidence.uses
    alpha = w.alpha1 if uses_z1 else w.alpha2
    if evidence.torus is not None and evidence.torus.tag == "empty":
        return "cyclic", "one-variable-no-circle-zeros"
    return ("cyclic" if alpha <= 1.0 + BOUNDARY_TOL else "not_cyclic"), "one-variable"


def _classify_single(evidence: PolynomialEvidence, w: WeightPair) -> CyclicityVerdict:
    info = evidence.to_dict()
    if not evidence.stability.zero_free:
        return CyclicityVerdict("not_cyclic", "interior-zero", w, info)

    uses_z1, uses_z2 = evidence.uses
    if not uses_z1 and not uses_z2:
        return CyclicityVerdict("cyclic", "constant", w, info)
    if uses_z1 != uses_z2:
        verdict, rule = _one_variable_verdict(evidence, w)
        return CyclicityVerdict(verdict, rule, w, info)

    if evidence.resolution_issue is not None or evidence.torus is None:
        return CyclicityVerdict("out_of_theorem_scope", "unresolved-torus-zeros", w, info)
    verdict, rule = theorem_region(evidence.torus.tag, w)
    irreducible = evidence.irreducible
    if irreducible is True:
        return CyclicityVerdict(verdict, rule, w, info)
    scope_rule = "reducible-without-factors" if irreducible is False else "irreducibility-unknown"
    return CyclicityVerdict("out_of_theorem_scope", scope_rule, w, info, conditional_verdict=verdict)


def _combine_factors(parts: List[CyclicityVerdict], w: WeightPair, info: Dict[str, Any]) -> CyclicityVerdict:
    verdicts = {part.verdict for part in parts}
    if "not_cyclic" in verdicts:
        combined = "not_cyclic"
    elif verdicts == {"cyclic"}:
        combined = "cyclic"
    else:
        combined = "out_of_theorem_scope"
    return CyclicityVerdict(combined, "product", w, info, factors=parts)


def _check_factorization(p: BivariateSeries, factors: Sequence[BivariateSeries], tol: float = 1e-9) -> None:
    product = factors[0]
    for factor in factors[1:]:
        product = polynomial_product(product, factor)
    gap = subtract(trim(p), trim(product))
    scale = float(np.max(np.abs(trim(p).coeffs)))
    if float(np.max(np.abs(gap.coeffs))) > tol * scale:
        logger.warning("supplied factors do not multiply to p; the product rule uses the factors as given.")


def classify(
    p: BivariateSeries,
    w: WeightPair,
    assertions: Optional[Dict[str, Any]] = None,
    *,
    evidence: Optional[PolynomialEvidence] = None,
    factor_evidence: Optional[List[PolynomialEvidence]] = None,
    **analysis,
) -> CyclicityVerdict:
    """Verdict for p in D_w.

    Order: an interior zero decides not_cyclic; supplied factors are
    classified one by one and combined; constants are cyclic; one-variable
    polynomials follow the one-variable rule; two-variable irreducible
    polynomials follow the three weight regions. ``assertions`` may carry
    ``irreducible`` (bool) and ``factors`` (list of BivariateSeries).
    """
    assertions = assertions or {}
    factors = assertions.get("factors") or []
    if evidence is None:
        evidence = analyze_polynomial(p, irreducible=assertions.get("irreducible"), **analysis)

    if factors:
        info = evidence.to_dict()
        if not evidence.stability.zero_free:
            return CyclicityVerdict("not_cyclic", "interior-zero", w, info)
        _check_factorization(evidence.polynomial, factors)
        if factor_evidence is None:
            factor_evidence = [analyze_polynomial(f, irreducible=True, **analysis) for f in factors]
        parts = [_classify_single(ev, w) for ev in factor_evidence]
        return _combine_factors(parts, w, info)
    return _classify_single(evidence, w)


# ----------------------------------------------------------- #
#                   Cross-check and lattice                   #
# ----------------------------------------------------------- #

def _agreement(verdict: str, fit) -> str:
    # disagreement is declared only on decisive evidence
    if fit.decaying == (verdict == "cyclic"):
        return "agree"
    if verdict == "cyclic" and fit.fits.get("plateau", {}).get("method") == "literal":
        return "disagree"
    if verdict == "not_cyclic" and (fit.regime == "vanishing"
                                    or (fit.regime == "power_law" and (fit.slope or 0.0) <= -0.3)):
        return "disagree"
    return "inconclusive"


def cross_validate(
    p: BivariateSeries,
    w: WeightPair,
    n_max: Optional[int] = None,
    *,
    verdict: Optional[CyclicityVerdict] = None,
    shape: Optional[str] = None,
    threads: int = 1,
) -> Dict[str, Any]:
    """Compare a theorem verdict with the decay of dist^2_N (cyclic iff decaying)."""
    if verdict is None:
        verdict = classify(p, w)
    if verdict.verdict not in ("cyclic", "not_cyclic"):
        return {"verdict": verdict.verdict, "agreement": "not_applicable"}
    shape = shape or natural_shape(trim(p))
    if n_max is None:
        n_max = DEFAULT_APPROX_PARAMS["APPROX_NMAX_SQUARE" if shape == "square" else "APPROX_NMAX_DIAGONAL"]
    report: Dict[str, Any] = {"verdict": verdict.verdict, "shape": shape, "n_max": int(n_max)}
    try:
        seq = distance_sequence(p, w, n_max, shape, threads=threads)
        fit = decay_fit(seq)
    except (Inconclusive, NumericalBreakdown) as exc:
        logger.info(f"cross-check inconclusive for {format_polynomial(p)} at {w.as_list()}: {exc}")
        report.update({"regime": None, "agreement": "inconclusive", "reason": str(exc)})
        return report
    report.update({"regime": fit.regime, "fit": fit.to_dict(), "agreement": _agreement(verdict.verdict, fit),
                   "last_dist_sq": float(seq.dist_sq[-1])})
    return report


def classify_lattice(
    p: BivariateSeries,
    alphas1: Sequence[float] = LATTICE_AXIS,
    alphas2: Sequence[float] = LATTICE_AXIS,
    assertions: Optional[Dict[str, Any]] = None,
    *,
    threads: int = 1,
    **analysis,
) -> pd.DataFrame:
    """Verdicts over a weight grid, one row per (alpha1, alpha2); the evidence is computed once."""
    assertions = assertions or {}
    evidence = analyze_polynomial(p, irreducible=assertions.get("irreducible"), **analysis)
    factors = assertions.get("factors") or []
    factor_evidence = [analyze_polynomial(f, irreducible=True, **analysis) for f in factors] if factors else None
    pairs = [WeightPair(float(a1), float(a2)) for a1 in alphas1 for a2 in alphas2]

    def one(w: WeightPair) -> Dict[str, Any]:
        result = classify(p, w, assertions, evidence=evidence, factor_evidence=factor_evidence)
        return {"alpha1": w.alpha1, "alpha2": w.alpha2, "verdict": result.verdict, "rule": result.rule}

    rows = map_parallel(one, pairs, threads)
    return pd.DataFrame(rows, columns=["alpha1", "alpha2", "verdict", "rule"])
