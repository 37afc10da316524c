import math

import numpy as np
import pytest
from scipy import stats

from rankmaxsum.dgp import (
    CovarianceSpec,
    ErrorLaw,
    make_beta_design1,
    make_beta_design2,
    sample_errors,
    theta_pattern,
    generate,
)
from rankmaxsum.model import DimensionError, DomainError


@pytest.mark.parametrize("law", list(ErrorLaw))
def test_error_moments(law):
    eps = sample_errors(law, 10**6, np.random.default_rng(17))
    assert abs(eps.mean()) < 0.01
    # heavy-tailed laws have noisy second moments; allow more room there
    tol = {ErrorLaw.E1: 0.01, ErrorLaw.E2: 0.05, ErrorLaw.E3: 0.05, ErrorLaw.E4: 0.02}[law]
    assert abs(eps.var() - 1.0) < tol


def test_e1_is_standard_normal():
    eps = sample_errors("E1", 20000, np.random.default_rng(3))
    assert stats.kstest(eps, "norm").pvalue > 1e-3


def test_e4_mixture_indicator():
    eps, wide = sample_errors("E4", 10**6, np.random.default_rng(8), return_indicator=True)
    assert abs(wide.mean() - 0.10) < 0.01
    assert np.std(eps[wide]) * math.sqrt(10.9) == pytest.approx(10.0, rel=0.02)
    assert np.std(eps[~wide]) * math.sqrt(10.9) == pytest.approx(1.0, rel=0.02)


def test_ar1_matrix_and_precision():
    spec = CovarianceSpec(p=6, rho=0.7)
    assert spec.matrix[0, 3] == pytest.approx(0.7**3)
    np.testing.assert_allclose(spec.matrix @ spec.precision, np.eye(6), atol=1e-12)
    np.testing.assert_allclose(CovarianceSpec(p=1, rho=0.3).precision, [[1.0]])


def test_covariance_domain():
    with pytest.raises(DomainError):
        CovarianceSpec(p=3, rho=1.0)


@pytest.mark.parametrize("s, q", [(1, 0), (5, 3), (20, 0)])
def test_design1(s, q):
    beta = make_beta_design1(40, s, q, np.random.default_rng(s))
    assert beta @ beta == pytest.approx(0.8, rel=1e-12)
    support = np.flatnonzero(beta)
    assert support.tolist() == list(range(q, q + s))


def test_design1_domain():
    with pytest.raises(DomainError):
        make_beta_design1(10, 5, 6)


def test_theta_pattern():
    theta = theta_pattern(10, 3, 100)
    scale = 2 * math.sqrt(2 * math.log(10) / 100)
    np.testing.assert_allclose(theta, scale * np.array([1, -1, 1, 0, 0, 0, 0, 0, 0, 0]))


def test_design2():
    np.testing.assert_allclose(make_beta_design2(8, 4, 50, np.eye(8)), theta_pattern(8, 4, 50))
    sigma = CovarianceSpec(p=30, rho=0.5).matrix
    beta = make_beta_design2(30, 6, 100, sigma)
    assert np.linalg.norm(sigma @ beta - theta_pattern(30, 6, 100)) <= 1e-10


def test_generate_deterministic():
    cov = CovarianceSpec(p=5)
    a = generate(20, cov, np.ones(5), "E2", np.random.default_rng(1))
    b = generate(20, cov, np.ones(5), "E2", np.random.default_rng(1))
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.y, b.y)


def test_null_response_is_error():
    cov = CovarianceSpec(p=4)
    ds = generate(30, cov, None, "E3", np.random.default_rng(2))
    r = np.random.default_rng(2)
    r.standard_normal((30, 4))
    np.testing.assert_array_equal(ds.y, sample_errors("E3", 30, r))


def test_generate_shapes():
    with pytest.raises(DimensionError):
        generate(10, CovarianceSpec(p=4), np.ones(3), "E1", np.random.default_rng(0))


def test_sample_covariance_close():
    spec = CovarianceSpec(p=10, rho=0.7)
    ds = generate(10**4, spec, None, "E1", np.random.default_rng(21))
    assert np.max(np.abs(np.cov(ds.X, rowvar=False) - spec.matrix)) < 0.05
