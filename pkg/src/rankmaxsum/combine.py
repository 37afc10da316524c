"""Cauchy and minimum-p combination of component p-values, and the RC1/RC2 tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .maxtest import DEFAULT_B, test_rm1, test_rm2
from .model import Calibration, Dataset, DomainError, Method, TestReport, validate
from .ranks import wilcoxon_scores
from .sumtest import test_rs

ONE_MINUS_EPS = float(np.nextafter(1.0, 0.0))
P_FLOOR = 1e-300


@dataclass(frozen=True)
class CombinationResult:
    t_combined: float
    p_combined: float
    components: list[tuple[str, float, float]] = field(default_factory=list)


def cauchy_transform(p) -> np.ndarray:
    """``tan((1/2 - p) pi)``, evaluated as ``1 / tan(p pi)`` for accuracy near 0."""
    p = np.asarray(p, dtype=np.float64)
    return 1.0 / np.tan(p * math.pi)


def cauchy_sf(t: float) -> float:
    """``1/2 - arctan(t) / pi``, the standard Cauchy upper tail."""
    if t > 1.0:
        return math.atan(1.0 / t) / math.pi
    return 0.5 - math.atan(t) / math.pi


def cauchy_critical_value(alpha: float) -> float:
    return math.tan((0.5 - alpha) * math.pi)


def cauchy_combine(pvalues, weights=None, labels=None) -> CombinationResult:
    pvalues = np.asarray(pvalues, dtype=np.float64)
    if pvalues.ndim != 1 or pvalues.size < 1:
        raise DomainError("need a non-empty vector of p-values")
    if np.any(~np.isfinite(pvalues)) or np.any(pvalues <= 0.0) or np.any(pvalues >= 1.0):
        raise DomainError(f"Cauchy combination needs p-values in (0, 1), got {pvalues.tolist()}")
    if weights is None:
        weights = np.full(pvalues.size, 1.0 / pvalues.size)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != pvalues.shape or np.any(weights <= 0.0) or not np.all(np.isfinite(weights)):
        raise DomainError("weights must be positive and match the p-values")
    weights = weights / weights.sum()
    t = float(np.sum(weights * cauchy_transform(pvalues)))
    if labels is None:
        labels = [str(i) for i in range(pvalues.size)]
    comps = [(str(m), float(p), float(w)) for m, p, w in zip(labels, pvalues, weights)]
    return CombinationResult(t_combined=t, p_combined=cauchy_sf(t), components=comps)


def minp_combine(p1: float, p2: float, labels=("1", "2")) -> CombinationResult:
    """``1 - (1 - min(p1, p2))^2``, the two-component min-p rule under independence."""
    for p in (p1, p2):
        if not (0.0 <= p <= 1.0):
            raise DomainError(f"min-p combination needs p-values in [0, 1], got {p}")
    pmin = min(p1, p2)
    p_comb = 1.0 - (1.0 - pmin) ** 2
    comps = [(labels[0], float(p1), 0.5), (labels[1], float(p2), 0.5)]
    return CombinationResult(t_combined=float(pmin), p_combined=float(p_comb), components=comps)


def clamp_component(report: TestReport) -> float:
    """Pull a component p-value into the open interval before the tangent transform.

    Bootstrap p-values on the 1/(B+1) grid are clamped to
    ``[1/(10B), 1 - 1/(10B)]``; analytic ones only away from exact 0 and 1.
    """
    p = report.pvalue
    if report.calibration is Calibration.MULTIPLIER or report.calibration is Calibration.PERMUTATION:
        B = report.aux.get("B", DEFAULT_B)
        lo = 1.0 / (10.0 * B)
        return min(max(p, lo), 1.0 - lo)
    return min(max(p, P_FLOOR), ONE_MINUS_EPS)


def combine_reports(method: Method, sum_report: TestReport, max_report: TestReport,
                    weights=None) -> TestReport:
    res = cauchy_combine(
        [clamp_component(sum_report), clamp_component(max_report)],
        weights=weights,
        labels=[sum_report.method.value, max_report.method.value],
    )
    aux = {
        f"p_{sum_report.method.value}": sum_report.pvalue,
        f"p_{max_report.method.value}": max_report.pvalue,
        f"stat_{sum_report.method.value}": sum_report.statistic,
        f"stat_{max_report.method.value}": max_report.statistic,
    }
    return TestReport(method=method, statistic=res.t_combined, pvalue=res.p_combined,
                      calibration=Calibration.CAUCHY, aux=aux)


def test_rc1(
    dataset: Dataset,
    B: int = DEFAULT_B,
    rng: np.random.Generator | int | None = None,
    max_calibration: Calibration | str = Calibration.MULTIPLIER,
    weights=None,
) -> TestReport:
    validate(dataset)
    scores = wilcoxon_scores(dataset.y)
    rs = test_rs(dataset, scores=scores)
    rm1 = test_rm1(dataset, calibration=max_calibration, B=B, rng=rng, scores=scores)
    return combine_reports(Method.RC1, rs, rm1, weights)


def test_rc2(
    dataset: Dataset,
    omega_hat=None,
    B: int = DEFAULT_B,
    rng: np.random.Generator | int | None = None,
    max_calibration: Calibration | str = Calibration.MULTIPLIER,
    weights=None,
) -> TestReport:
    validate(dataset)
    scores = wilcoxon_scores(dataset.y)
    rs = test_rs(dataset, scores=scores)
    rm2 = test_rm2(dataset, omega_hat=omega_hat, calibration=max_calibration, B=B,
                   rng=rng, scores=scores)
    return combine_reports(Method.RC2, rs, rm2, weights)


test_rc1.__test__ = False
test_rc2.__test__ = False
