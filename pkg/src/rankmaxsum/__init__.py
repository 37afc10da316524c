"""Rank-based sum, max and Cauchy-combined global tests for high-dimensional linear regression."""

__version__ = "0.1.0"

from .baselines import test_com, test_eb, test_max
from .combine import cauchy_combine, minp_combine, test_rc1, test_rc2
from .maxtest import gumbel_pvalue, marginal_coords, multiplier_pvalue, precision_coords, test_rm1, test_rm2
from .model import (
    Calibration,
    Dataset,
    DegenerateError,
    DimensionError,
    DomainError,
    GumbelCalibration,
    LengthMismatch,
    Method,
    NonFiniteError,
    TestReport,
    validate,
)
from .precision import BandedPrecision, band, cv_band_select, estimate_precision
from .ranks import rank, wilcoxon_scores
from .sumtest import rank_sum_ustat, test_rs, trace_sigma2_bruteforce, trace_sigma2_hat

__all__ = [
    "BandedPrecision",
    "Calibration",
    "Dataset",
    "DegenerateError",
    "DimensionError",
    "DomainError",
    "GumbelCalibration",
    "LengthMismatch",
    "Method",
    "NonFiniteError",
    "TestReport",
    "band",
    "cauchy_combine",
    "cv_band_select",
    "estimate_precision",
    "gumbel_pvalue",
    "marginal_coords",
    "minp_combine",
    "multiplier_pvalue",
    "precision_coords",
    "rank",
    "rank_sum_ustat",
    "test_com",
    "test_eb",
    "test_max",
    "test_rc1",
    "test_rc2",
    "test_rm1",
    "test_rm2",
    "test_rs",
    "trace_sigma2_bruteforce",
    "trace_sigma2_hat",
    "validate",
    "wilcoxon_scores",
]
