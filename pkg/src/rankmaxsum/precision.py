"""Banded covariance estimation with random-split cross-validation, inverted to a precision matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .model import DimensionError, DomainError, NonFiniteError, SingularError

DEFAULT_SPLITS = 50
DEFAULT_KMAX = 20
RIDGE_FLOOR = 1e-6
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class BandedPrecision:
    omega_hat: np.ndarray
    band_k: int
    ridge_tau: float


def band(S, k: int) -> np.ndarray:
    """Zero every entry of ``S`` farther than ``k`` from the diagonal."""
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DomainError(f"band needs a square matrix, got shape {S.shape}")
    p = S.shape[0]
    if int(k) != k or not 0 <= k <= max(p - 1, 0):
        raise DomainError(f"bandwidth must be an integer in [0, {p - 1}], got {k}")
    i = np.arange(p)
    mask = np.abs(i[:, None] - i[None, :]) <= k
    return np.where(mask, S, 0.0)


def sample_covariance(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    Xc = X - X.mean(axis=0)
    return Xc.T @ Xc / (X.shape[0] - 1)


def _diagonal_covariances(X, M, m, kmax):
    """Per-split covariance diagonals ``S[j, j+d]`` for ``d = 0..kmax``.

    ``M`` is a ``splits x n`` 0/1 membership matrix, each row with ``m`` ones.
    Returns a list indexed by ``d`` of ``splits x (p - d)`` arrays.
    """
    mu = M @ X / m
    out = []
    for d in range(kmax + 1):
        cross = M @ (X[:, : X.shape[1] - d] * X[:, d:])
        out.append((cross - m * mu[:, : X.shape[1] - d] * mu[:, d:]) / (m - 1))
    return out


def band_risk_path(X, train_idx, valid_idx, kmax: int) -> np.ndarray:
    """Frobenius risks ``||B_k(S_train) - S_valid||_F`` for ``k = 0..kmax``.

    ``train_idx`` / ``valid_idx`` are ``splits x m`` index arrays; the result
    has shape ``splits x (kmax + 1)``. Only the ``kmax + 1`` leading
    diagonals of each covariance are formed; the full validation norm comes
    from the doubly-centered ``m x m`` Gram block.
    """
    X = np.asarray(X, dtype=np.float64)
    X = X - X.mean(axis=0)
    n = X.shape[0]
    train_idx = np.atleast_2d(train_idx)
    valid_idx = np.atleast_2d(valid_idx)
    splits, m1 = train_idx.shape
    m2 = valid_idx.shape[1]
    rows = np.arange(splits)[:, None]
    Mtr = np.zeros((splits, n))
    Mtr[rows, train_idx] = 1.0
    Mva = np.zeros((splits, n))
    Mva[rows, valid_idx] = 1.0

    Str = _diagonal_covariances(X, Mtr, m1, kmax)
    Sva = _diagonal_covariances(X, Mva, m2, kmax)

    gram = X @ X.T
    blocks = gram[valid_idx[:, :, None], valid_idx[:, None, :]]
    blocks = blocks - blocks.mean(axis=1, keepdims=True)
    blocks = blocks - blocks.mean(axis=2, keepdims=True)
    valid_sq = np.sum(blocks * blocks, axis=(1, 2)) / (m2 - 1) ** 2

    risk_sq = np.empty((splits, kmax + 1))
    acc = valid_sq.copy()
    for d in range(kmax + 1):
        w = 1.0 if d == 0 else 2.0
        acc = acc + w * (np.sum((Str[d] - Sva[d]) ** 2, axis=1) - np.sum(Sva[d] ** 2, axis=1))
        risk_sq[:, d] = acc
    return np.sqrt(np.maximum(risk_sq, 0.0))


def random_splits(n: int, splits: int, rng: np.random.Generator):
    """Index arrays for ``splits`` random partitions into ceil(n/2) / floor(n/2)."""
    m1 = (n + 1) // 2
    perms = np.argsort(rng.random((splits, n)), axis=1)
    return perms[:, :m1], perms[:, m1:]


def cv_band_select(
    X,
    splits: int = DEFAULT_SPLITS,
    kmax: int | None = None,
    rng: np.random.Generator | int | None = None,
) -> int:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"X must be 2-dimensional, got shape {X.shape}")
    n, p = X.shape
    if n < 8:
        raise DimensionError(f"cross-validated banding needs n >= 8, got n={n}")
    if splits < 2:
        raise DomainError(f"need at least 2 splits, got {splits}")
    if kmax is None:
        kmax = min(p - 1, DEFAULT_KMAX)
    if int(kmax) != kmax or not 0 <= kmax <= p - 1:
        raise DomainError(f"kmax must be an integer in [0, {p - 1}], got {kmax}")
    if kmax == 0:
        return 0
    rng = np.random.default_rng(rng)
    tr, va = random_splits(n, splits, rng)
    risks = band_risk_path(X, tr, va, int(kmax)).mean(axis=0)
    return int(np.argmin(risks))  # first minimiser, i.e. smallest k on ties


def estimate_precision(
    X,
    splits: int = DEFAULT_SPLITS,
    kmax: int | None = None,
    rng: np.random.Generator | int | None = None,
    band_k: int | None = None,
) -> BandedPrecision:
    """Invert the cross-validated banded sample covariance.

    If the banded matrix has smallest eigenvalue below ``RIDGE_FLOOR`` it is
    shifted up to exactly that floor before inversion. Passing ``band_k``
    skips cross-validation.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"X must be 2-dimensional, got shape {X.shape}")
    n, p = X.shape
    if n < 8 or p < 1:
        raise DimensionError(f"precision estimation needs n >= 8 and p >= 1, got n={n}, p={p}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteError("X contains NaN or Inf")
    if band_k is None:
        band_k = cv_band_select(X, splits=splits, kmax=kmax, rng=rng)
    S = band(sample_covariance(X), band_k)
    S = 0.5 * (S + S.T)

    tau = 0.0
    try:
        linalg.cholesky(S - RIDGE_FLOOR * np.eye(p), lower=True, check_finite=False)
    except linalg.LinAlgError:
        lam_min = float(linalg.eigvalsh(S, subset_by_index=[0, 0], check_finite=False)[0])
        tau = max(RIDGE_FLOOR - lam_min, 0.0)
    Sr = S + tau * np.eye(p) if tau > 0.0 else S
    try:
        factor = linalg.cho_factor(Sr, lower=True, check_finite=False)
        omega = linalg.cho_solve(factor, np.eye(p), check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularError(f"banded covariance is not invertible: {exc}") from exc
    omega = 0.5 * (omega + omega.T)
    resid = float(np.max(np.abs(Sr @ omega - np.eye(p))))
    if not math.isfinite(resid) or resid > RESIDUAL_TOL:
        raise SingularError(f"inversion residual {resid:.3g} exceeds {RESIDUAL_TOL:g}")
    omega.setflags(write=False)
    return BandedPrecision(omega_hat=omega, band_k=int(band_k), ridge_tau=float(tau))
