"""Core data types, error taxonomy and input validation.

Matrices are dense float64 arrays laid out row-major with rows as
observations and columns as covariates (``X.shape == (n, p)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np


class RankMaxSumError(ValueError):
    """Base class for all domain errors raised by this package."""


class DimensionError(RankMaxSumError):
    pass


class LengthMismatch(DimensionError):
    pass


class NonFiniteError(RankMaxSumError):
    pass


class DomainError(RankMaxSumError):
    pass


class DegenerateError(RankMaxSumError):
    pass


class ZeroVarianceColumn(DegenerateError):
    def __init__(self, column: int):
        super().__init__(f"column {column} has zero variance after centering")
        self.column = column


class BadPrecision(RankMaxSumError):
    pass


class SingularError(RankMaxSumError):
    pass


class Method(str, Enum):
    RS = "RS"
    RM1 = "RM1"
    RM2 = "RM2"
    RC1 = "RC1"
    RC2 = "RC2"
    EB = "EB"
    MAX = "MAX"
    COM = "COM"


class Calibration(str, Enum):
    NORMAL = "normal"
    GUMBEL = "gumbel"
    MULTIPLIER = "multiplier"
    PERMUTATION = "permutation"
    CAUCHY = "cauchy"
    MINP = "minp"


ALLOWED_CALIBRATIONS: dict[Method, frozenset[Calibration]] = {
    Method.RS: frozenset({Calibration.NORMAL}),
    Method.RM1: frozenset({Calibration.GUMBEL, Calibration.MULTIPLIER}),
    Method.RM2: frozenset({Calibration.GUMBEL, Calibration.MULTIPLIER}),
    Method.RC1: frozenset({Calibration.CAUCHY}),
    Method.RC2: frozenset({Calibration.CAUCHY}),
    Method.EB: frozenset({Calibration.PERMUTATION}),
    Method.MAX: frozenset({Calibration.GUMBEL}),
    Method.COM: frozenset({Calibration.MINP}),
}

# Column order of the eight procedures in result tables.
ALL_METHODS: tuple[Method, ...] = (
    Method.MAX,
    Method.EB,
    Method.COM,
    Method.RS,
    Method.RM1,
    Method.RM2,
    Method.RC1,
    Method.RC2,
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """An ``n x p`` design matrix ``X`` with response vector ``y``.

    Construction only coerces to read-only float64 arrays; call
    :func:`validate` to check the invariants.
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "X", _frozen(self.X))
        object.__setattr__(self, "y", _frozen(self.y))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1] if self.X.ndim == 2 else 0


def validate(dataset: Dataset) -> None:
    """Raise if ``dataset`` violates the Dataset invariants; otherwise return None."""
    X, y = dataset.X, dataset.y
    if X.ndim != 2:
        raise DimensionError(f"X must be 2-dimensional, got shape {X.shape}")
    if y.ndim != 1:
        raise DimensionError(f"y must be 1-dimensional, got shape {y.shape}")
    n, p = X.shape
    if n < 2 or p < 1:
        raise DimensionError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
    if y.shape[0] != n:
        raise LengthMismatch(f"len(y)={y.shape[0]} does not match n={n}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteError("X contains NaN or Inf")
    if not np.all(np.isfinite(y)):
        raise NonFiniteError("y contains NaN or Inf")


def require_n(dataset: Dataset, minimum: int, what: str) -> None:
    if dataset.n < minimum:
        raise DimensionError(f"{what} needs n >= {minimum}, got n={dataset.n}")


@dataclass(frozen=True)
class TestReport:
    """Outcome of one global test on one dataset."""

    __test__ = False  # keep pytest from collecting this class

    method: Method
    statistic: float
    pvalue: float
    calibration: Calibration
    aux: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        method = Method(self.method)
        calibration = Calibration(self.calibration)
        object.__setattr__(self, "method", method)
        object.__setattr__(self, "calibration", calibration)
        object.__setattr__(self, "statistic", float(self.statistic))
        object.__setattr__(self, "pvalue", float(self.pvalue))
        object.__setattr__(self, "aux", dict(self.aux))
        if not 0.0 <= self.pvalue <= 1.0:
            raise DomainError(f"p-value {self.pvalue} outside [0, 1]")
        if calibration not in ALLOWED_CALIBRATIONS[method]:
            raise DomainError(
                f"calibration {calibration.value!r} is not valid for {method.value}"
            )

    def to_record(self) -> dict:
        return {
            "method": self.method.value,
            "statistic": self.statistic,
            "pvalue": self.pvalue,
            "calibration": self.calibration.value,
            "aux": dict(sorted(self.aux.items())),
        }


@dataclass(frozen=True)
class GumbelCalibration:
    """Centering and limit law for maxima of ``p`` squared standardized coordinates.

    The centered statistic ``T - (2 log p - log log p)`` converges to the law
    with c.d.f. ``F(y) = exp(-exp(-y/2) / sqrt(pi))``.
    """

    p: int

    def __post_init__(self) -> None:
        if int(self.p) != self.p or self.p < 3:
            raise DomainError(f"Gumbel calibration needs integer p >= 3, got {self.p}")

    @property
    def centering(self) -> float:
        return 2.0 * math.log(self.p) - math.log(math.log(self.p))

    @staticmethod
    def cdf(y: float | np.ndarray) -> float | np.ndarray:
        return np.exp(-np.exp(-np.asarray(y, dtype=float) / 2.0) / math.sqrt(math.pi))

    @staticmethod
    def sf(y: float | np.ndarray) -> float | np.ndarray:
        # 1 - exp(-u) computed as -expm1(-u) to keep precision in the far tail
        u = np.exp(-np.asarray(y, dtype=float) / 2.0) / math.sqrt(math.pi)
        return -np.expm1(-u)

    @staticmethod
    def quantile(q: float) -> float:
        if not 0.0 < q < 1.0:
            raise DomainError(f"quantile level must lie in (0, 1), got {q}")
        return -2.0 * math.log(-math.sqrt(math.pi) * math.log(q))
