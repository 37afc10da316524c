"""Wilcoxon-score max-type tests T_RM1 (marginal) and T_RM2 (precision-adjusted)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    BadPrecision,
    Calibration,
    Dataset,
    DimensionError,
    DomainError,
    GumbelCalibration,
    Method,
    TestReport,
    ZeroVarianceColumn,
    require_n,
    validate,
)
from .ranks import ScoreVector, wilcoxon_scores

DEFAULT_B = 2000


@dataclass(frozen=True)
class MaxTestInternals:
    coords: np.ndarray
    statistic: float
    c_n: float


def c_n(n: int) -> float:
    return math.sqrt((n + 1) / (n - 1))


def _scores(e) -> np.ndarray:
    return np.asarray(e.e if isinstance(e, ScoreVector) else e, dtype=np.float64)


def marginal_directions(X) -> np.ndarray:
    """Centered columns of ``X`` scaled to unit Euclidean norm."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"X must be 2-dimensional, got shape {X.shape}")
    Xc = X - X.mean(axis=0)
    norms = np.linalg.norm(Xc, axis=0)
    scale = np.max(np.abs(X), axis=0)
    # a column is constant when its centered norm is zero up to rounding
    bad = norms <= 1e-13 * np.maximum(scale, 1e-300) * math.sqrt(X.shape[0])
    if np.any(bad):
        raise ZeroVarianceColumn(int(np.flatnonzero(bad)[0]))
    return Xc / norms


def precision_directions(X, omega_hat) -> np.ndarray:
    """Centered columns of ``X @ omega_hat`` divided by ``sqrt(n * omega_jj)``."""
    X = np.asarray(X, dtype=np.float64)
    omega_hat = np.asarray(omega_hat, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"X must be 2-dimensional, got shape {X.shape}")
    n, p = X.shape
    if omega_hat.shape != (p, p):
        raise BadPrecision(f"precision matrix has shape {omega_hat.shape}, expected ({p}, {p})")
    diag = np.diag(omega_hat)
    if not np.all(np.isfinite(omega_hat)) or np.any(diag <= 0.0):
        raise BadPrecision("precision matrix must be finite with a positive diagonal")
    Xn = X @ omega_hat
    Xn -= Xn.mean(axis=0)
    return Xn / np.sqrt(n * diag)


def marginal_coords(X, e) -> np.ndarray:
    """Studentized rank-score correlations ``w_j``."""
    e = _scores(e)
    n = e.shape[0]
    if n < 3:
        raise DimensionError(f"need n >= 3, got n={n}")
    D = marginal_directions(X)
    if D.shape[0] != n:
        raise DimensionError(f"X has {D.shape[0]} rows but scores have length {n}")
    return c_n(n) * (e @ D)


def precision_coords(X, e, omega_hat) -> np.ndarray:
    """Precision-transformed coordinates ``W_j``."""
    e = _scores(e)
    n = e.shape[0]
    if n < 3:
        raise DimensionError(f"need n >= 3, got n={n}")
    D = precision_directions(X, omega_hat)
    if D.shape[0] != n:
        raise DimensionError(f"X has {D.shape[0]} rows but scores have length {n}")
    return c_n(n) * (e @ D)


def max_internals(coords: np.ndarray, n: int) -> MaxTestInternals:
    coords = np.asarray(coords, dtype=np.float64)
    return MaxTestInternals(coords=coords, statistic=float(np.max(coords**2)), c_n=c_n(n))


def gumbel_pvalue(statistic: float, p: int) -> float:
    """Upper-tail p-value of ``statistic - 2 log p + log log p`` under the Gumbel limit."""
    if p < 3:
        raise DomainError(f"Gumbel calibration needs p >= 3, got p={p}")
    cal = GumbelCalibration(int(p))
    if statistic == math.inf:
        return 0.0
    return float(min(1.0, max(0.0, cal.sf(statistic - cal.centering))))


def multiplier_maxima(directions: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Maxima of squared coordinates with scores replaced by rows of ``G``.

    ``directions`` is ``n x p`` (output of one of the ``*_directions``
    helpers), ``G`` is ``B x n``; returns the ``B`` replicate statistics.
    """
    return np.max(np.square(G @ directions), axis=1)


def multiplier_pvalue_from_maxima(maxima: np.ndarray, observed: float) -> float:
    B = maxima.shape[0]
    return float((1 + np.count_nonzero(maxima >= observed)) / (B + 1))


def draw_multipliers(rng: np.random.Generator, B: int, n: int) -> np.ndarray:
    return rng.standard_normal((B, n))


def multiplier_pvalue(
    X,
    variant: Method | str,
    observed: float,
    B: int = DEFAULT_B,
    rng: np.random.Generator | int | None = None,
    omega_hat=None,
) -> float:
    """Gaussian multiplier bootstrap p-value ``(1 + #{T_b >= observed}) / (B + 1)``.

    Replicates drop the ``c_n`` factor because the multipliers already have
    unit variance.
    """
    variant = Method(variant)
    if B < 100:
        raise DomainError(f"need B >= 100 multiplier replicates, got {B}")
    if variant is Method.RM1:
        if omega_hat is not None:
            raise DomainError("omega_hat is only used by the RM2 variant")
        D = marginal_directions(X)
    elif variant is Method.RM2:
        if omega_hat is None:
            raise DomainError("RM2 multiplier calibration requires omega_hat")
        D = precision_directions(X, omega_hat)
    else:
        raise DomainError(f"multiplier calibration is defined for RM1/RM2, not {variant.value}")
    rng = np.random.default_rng(rng)
    G = draw_multipliers(rng, B, D.shape[0])
    return multiplier_pvalue_from_maxima(multiplier_maxima(D, G), observed)


def _report(method, statistic, p, n, directions, calibration, B, rng, extra):
    calibration = Calibration(calibration)
    aux = dict(extra)
    if calibration is Calibration.MULTIPLIER:
        if B < 100:
            raise DomainError(f"need B >= 100 multiplier replicates, got {B}")
        G = draw_multipliers(np.random.default_rng(rng), B, n)
        pvalue = multiplier_pvalue_from_maxima(multiplier_maxima(directions, G), statistic)
        aux["B"] = float(B)
    elif calibration is Calibration.GUMBEL:
        pvalue = gumbel_pvalue(statistic, p)
    else:
        raise DomainError(f"{method.value} supports gumbel or multiplier calibration")
    return TestReport(method=method, statistic=statistic, pvalue=pvalue,
                      calibration=calibration, aux=aux)


def test_rm1(
    dataset: Dataset,
    calibration: Calibration | str = Calibration.MULTIPLIER,
    B: int = DEFAULT_B,
    rng: np.random.Generator | int | None = None,
    scores: ScoreVector | None = None,
) -> TestReport:
    validate(dataset)
    require_n(dataset, 3, "RM1")
    if scores is None:
        scores = wilcoxon_scores(dataset.y)
    D = marginal_directions(dataset.X)
    n = dataset.n
    coords = c_n(n) * (scores.e @ D)
    statistic = float(np.max(coords**2))
    return _report(Method.RM1, statistic, dataset.p, n, D, calibration, B, rng,
                   {"argmax": float(np.argmax(coords**2))})


def test_rm2(
    dataset: Dataset,
    omega_hat=None,
    calibration: Calibration | str = Calibration.MULTIPLIER,
    B: int = DEFAULT_B,
    rng: np.random.Generator | int | None = None,
    scores: ScoreVector | None = None,
) -> TestReport:
    """Precision-adjusted max test; ``omega_hat`` defaults to the banded estimate."""
    validate(dataset)
    require_n(dataset, 3, "RM2")
    rng = np.random.default_rng(rng)
    extra = {}
    if omega_hat is None:
        from .precision import estimate_precision

        est = estimate_precision(dataset.X, rng=rng)
        omega_hat = est.omega_hat
        extra = {"band_k": float(est.band_k), "ridge_tau": est.ridge_tau}
    if scores is None:
        scores = wilcoxon_scores(dataset.y)
    D = precision_directions(dataset.X, omega_hat)
    n = dataset.n
    coords = c_n(n) * (scores.e @ D)
    statistic = float(np.max(coords**2))
    extra["argmax"] = float(np.argmax(coords**2))
    return _report(Method.RM2, statistic, dataset.p, n, D, calibration, B, rng, extra)


test_rm1.__test__ = False
test_rm2.__test__ = False
