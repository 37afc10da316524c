"""Midranks and Wilcoxon scores of the response."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .model import DimensionError, NonFiniteError

SQRT12 = math.sqrt(12.0)


@dataclass(frozen=True)
class ScoreVector:
    """Wilcoxon scores ``e_i = sqrt(12) * (R_i / (n + 1) - 1/2)``.

    ``sum(e) == 0`` always holds. ``sum(e**2) == n(n-1)/(n+1)`` holds exactly
    only for untied responses; ties are handled by midranks.
    """

    e: np.ndarray
    n: int
    has_ties: bool = False

    def __post_init__(self) -> None:
        e = np.array(self.e, dtype=np.float64, copy=True)
        e.setflags(write=False)
        object.__setattr__(self, "e", e)

    @property
    def sum_squares_untied(self) -> float:
        return self.n * (self.n - 1) / (self.n + 1)


def rank(y) -> np.ndarray:
    """Midranks of ``y`` (1-based; tied values share the average rank)."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size < 1:
        raise DimensionError(f"rank needs a non-empty 1-d vector, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise NonFiniteError("cannot rank NaN or Inf")
    return rankdata(y, method="average").astype(np.float64)


def wilcoxon_scores(y) -> ScoreVector:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size < 2:
        raise DimensionError(f"Wilcoxon scores need n >= 2, got shape {y.shape}")
    n = y.size
    r = rank(y)
    e = SQRT12 * (r / (n + 1) - 0.5)
    has_ties = np.unique(y).size < n
    return ScoreVector(e=e, n=n, has_ties=bool(has_ties))
