"""Least-squares competitors: empirical-Bayes score test (EB), max test (MAX) and their min-p combination (COM)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .combine import minp_combine
from .maxtest import gumbel_pvalue
from .model import (
    Calibration,
    Dataset,
    DegenerateError,
    DomainError,
    Method,
    TestReport,
    ZeroVarianceColumn,
    require_n,
    validate,
)

DEFAULT_PERM_B = 2000


@dataclass(frozen=True)
class BaselineInternals:
    t_eb: float
    t_max: float
    sigma2_hat: float


def eb_statistic(X, y) -> float:
    """``y'XX'y / y'y``."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    yy = float(y @ y)
    if yy <= 0.0:
        raise DegenerateError("EB statistic is undefined for an all-zero response")
    v = X.T @ y
    return float(v @ v) / yy


def permutation_pvalue(X, y, observed: float, B: int, rng: np.random.Generator) -> float:
    """``(1 + #{T_EB(perm) >= observed}) / (B + 1)`` over ``B`` uniform row permutations of ``y``."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    Y = rng.permuted(np.broadcast_to(y, (B, y.size)), axis=1)
    V = Y @ X
    # permuting y leaves y'y unchanged
    stats = np.einsum("ij,ij->i", V, V) / float(y @ y)
    # relative slack so replicates equal to observed up to rounding still count
    tol = 1e-12 * max(abs(observed), 1.0)
    return float((1 + np.count_nonzero(stats >= observed - tol)) / (B + 1))


def test_eb(
    dataset: Dataset,
    B_perm: int = DEFAULT_PERM_B,
    rng: np.random.Generator | int | None = None,
) -> TestReport:
    validate(dataset)
    if B_perm < 100:
        raise DomainError(f"need B_perm >= 100 permutations, got {B_perm}")
    t_eb = eb_statistic(dataset.X, dataset.y)
    pvalue = permutation_pvalue(dataset.X, dataset.y, t_eb, B_perm, np.random.default_rng(rng))
    return TestReport(method=Method.EB, statistic=t_eb, pvalue=pvalue,
                      calibration=Calibration.PERMUTATION, aux={"B": float(B_perm)})


def max_statistic(X, y) -> tuple[float, float]:
    """Return ``(T_MAX, sigma2_hat)`` with columns standardized to unit sample variance."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    sigma2 = float(np.var(y, ddof=1))
    if not sigma2 > 0.0:
        raise DegenerateError("MAX test needs a non-constant response")
    Xc = X - X.mean(axis=0)
    sd = np.sqrt(np.sum(Xc * Xc, axis=0) / (n - 1))
    scale = np.max(np.abs(X), axis=0)
    bad = sd <= 1e-13 * np.maximum(scale, 1e-300)
    if np.any(bad):
        raise ZeroVarianceColumn(int(np.flatnonzero(bad)[0]))
    proj = (Xc / sd).T @ y / math.sqrt(n)
    return float(np.max(proj**2) / sigma2), sigma2


def test_max(dataset: Dataset) -> TestReport:
    validate(dataset)
    require_n(dataset, 3, "MAX")
    t_max, sigma2 = max_statistic(dataset.X, dataset.y)
    return TestReport(method=Method.MAX, statistic=t_max, pvalue=gumbel_pvalue(t_max, dataset.p),
                      calibration=Calibration.GUMBEL, aux={"sigma2_hat": sigma2})


def com_from_reports(eb: TestReport, mx: TestReport) -> TestReport:
    res = minp_combine(eb.pvalue, mx.pvalue, labels=("EB", "MAX"))
    return TestReport(method=Method.COM, statistic=res.t_combined, pvalue=res.p_combined,
                      calibration=Calibration.MINP,
                      aux={"p_EB": eb.pvalue, "p_MAX": mx.pvalue})


def test_com(
    dataset: Dataset,
    B_perm: int = DEFAULT_PERM_B,
    rng: np.random.Generator | int | None = None,
) -> TestReport:
    return com_from_reports(test_eb(dataset, B_perm, rng), test_max(dataset))


test_eb.__test__ = False
test_max.__test__ = False
test_com.__test__ = False
