"""Simulation designs: AR(1) covariates, standardized error laws E1-E4, and signal vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
from scipy import linalg

from .model import Dataset, DimensionError, DomainError, SingularError

DESIGN1_NORM2 = 0.8
DEFAULT_GRID = (1, 2, 5, 10, 20, 30, 40, 50)


class ErrorLaw(str, Enum):
    E1 = "E1"  # N(0, 1)
    E2 = "E2"  # t_3 / sqrt(3)
    E3 = "E3"  # standardized log-normal
    E4 = "E4"  # 0.9 N(0,1) + 0.1 N(0,100), scaled by 1/sqrt(10.9)


class SignalDesign(str, Enum):
    NULL = "null"
    DENSE_RANDOM = "dense_random"
    THETA_PATTERN = "theta_pattern"


@dataclass(frozen=True)
class CovarianceSpec:
    p: int
    rho: float = 0.7
    kind: str = "ar1"

    def __post_init__(self) -> None:
        if self.kind != "ar1":
            raise DomainError(f"unsupported covariance kind {self.kind!r}")
        if not -1.0 < self.rho < 1.0:
            raise DomainError(f"AR(1) needs |rho| < 1, got {self.rho}")
        if int(self.p) != self.p or self.p < 1:
            raise DomainError(f"p must be a positive integer, got {self.p}")

    @cached_property
    def matrix(self) -> np.ndarray:
        return covariance_matrix(self)

    @cached_property
    def cholesky(self) -> np.ndarray:
        return np.linalg.cholesky(self.matrix)

    @cached_property
    def precision(self) -> np.ndarray:
        """Closed-form tridiagonal inverse of the AR(1) matrix."""
        p, r = self.p, self.rho
        om = np.zeros((p, p))
        d = np.full(p, 1.0 + r * r)
        d[0] = d[-1] = 1.0
        if p == 1:
            d[0] = 1.0 - r * r
        om[np.diag_indices(p)] = d
        i = np.arange(p - 1)
        om[i, i + 1] = om[i + 1, i] = -r
        return om / (1.0 - r * r)


@dataclass(frozen=True)
class ErrorSpec:
    kind: ErrorLaw = ErrorLaw.E1

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ErrorLaw(self.kind))


@dataclass(frozen=True)
class SignalSpec:
    design: SignalDesign = SignalDesign.NULL
    size: int = 0  # s for design 1, m for design 2
    q: int = 0
    target: float = DESIGN1_NORM2

    def __post_init__(self) -> None:
        object.__setattr__(self, "design", SignalDesign(self.design))


def covariance_matrix(spec: CovarianceSpec) -> np.ndarray:
    idx = np.arange(spec.p)
    return spec.rho ** np.abs(idx[:, None] - idx[None, :]).astype(np.float64)


def sample_errors(spec: ErrorSpec | ErrorLaw | str, n: int, rng: np.random.Generator,
                  return_indicator: bool = False):
    """Draw ``n`` i.i.d. mean-zero unit-variance errors from one of E1-E4.

    With ``return_indicator`` the E4 component labels (True = wide component)
    are returned as well; they are all False for the other laws.
    """
    kind = spec.kind if isinstance(spec, ErrorSpec) else ErrorLaw(spec)
    if n < 1:
        raise DimensionError(f"need n >= 1, got {n}")
    wide = np.zeros(n, dtype=bool)
    if kind is ErrorLaw.E1:
        eps = rng.standard_normal(n)
    elif kind is ErrorLaw.E2:
        eps = rng.standard_t(3, size=n) / math.sqrt(3.0)
    elif kind is ErrorLaw.E3:
        z = rng.standard_normal(n)
        eps = (np.exp(z) - math.exp(0.5)) / math.sqrt(math.e * (math.e - 1.0))
    else:
        wide = rng.random(n) < 0.1
        eps = rng.standard_normal(n) * np.where(wide, 10.0, 1.0) / math.sqrt(10.9)
    if return_indicator:
        return eps, wide
    return eps


def make_beta_design1(p: int, s: int, q: int = 0, rng: np.random.Generator | None = None,
                      target: float = DESIGN1_NORM2) -> np.ndarray:
    """``s`` Gaussian coefficients at positions ``q..q+s-1`` scaled to squared norm ``target``."""
    if not (q >= 0 and s >= 1 and q + s <= p):
        raise DomainError(f"need q >= 0, s >= 1 and q + s <= p, got q={q}, s={s}, p={p}")
    rng = np.random.default_rng(rng)
    beta = np.zeros(p)
    vals = rng.standard_normal(s)
    while not np.all(vals != 0.0):
        vals = rng.standard_normal(s)
    beta[q:q + s] = vals * math.sqrt(target / float(vals @ vals))
    return beta


def theta_pattern(p: int, m: int, n: int) -> np.ndarray:
    if not 1 <= m <= p:
        raise DomainError(f"need 1 <= m <= p, got m={m}, p={p}")
    theta = np.zeros(p)
    j = np.arange(1, m + 1)
    theta[:m] = np.where(j % 2 == 1, 1.0, -1.0)
    return 2.0 * math.sqrt(2.0 * math.log(p) / n) * theta


def make_beta_design2(p: int, m: int, n: int, sigma) -> np.ndarray:
    """Solve ``sigma @ beta = theta`` for the alternating-sign pattern ``theta``."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != (p, p):
        raise DimensionError(f"sigma has shape {sigma.shape}, expected ({p}, {p})")
    theta = theta_pattern(p, m, n)
    try:
        beta = linalg.solve(sigma, theta, assume_a="pos")
    except (linalg.LinAlgError, ValueError) as exc:
        raise SingularError(f"cannot solve for beta: {exc}") from exc
    if np.linalg.norm(sigma @ beta - theta) > 1e-8:
        raise SingularError("covariance is numerically singular for the design-2 solve")
    return beta


def generate(n: int, covariance: CovarianceSpec, beta, error: ErrorSpec | ErrorLaw | str,
             rng: np.random.Generator) -> Dataset:
    """Rows ``X_i ~ N(0, Sigma)`` and ``y = X beta + eps``."""
    p = covariance.p
    beta = np.zeros(p) if beta is None else np.asarray(beta, dtype=np.float64)
    if beta.shape != (p,):
        raise DimensionError(f"beta has shape {beta.shape}, expected ({p},)")
    if n < 2:
        raise DimensionError(f"need n >= 2, got {n}")
    Z = rng.standard_normal((n, p))
    X = Z @ covariance.cholesky.T
    eps = sample_errors(error, n, rng)
    y = eps if not np.any(beta) else X @ beta + eps
    return Dataset(X=X, y=y)
