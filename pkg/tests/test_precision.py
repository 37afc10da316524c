import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rankmaxsum.dgp import CovarianceSpec
from rankmaxsum.model import DimensionError, DomainError
from rankmaxsum.precision import (
    band,
    band_risk_path,
    cv_band_select,
    estimate_precision,
    random_splits,
    sample_covariance,
)


def naive_risks(X, train, valid, kmax):
    out = np.empty((len(train), kmax + 1))
    for s, (a, b) in enumerate(zip(train, valid)):
        S1 = np.cov(X[a], rowvar=False)
        S2 = np.cov(X[b], rowvar=False)
        for k in range(kmax + 1):
            p = S1.shape[0]
            mask = np.abs(np.subtract.outer(np.arange(p), np.arange(p))) <= k
            out[s, k] = np.linalg.norm(S1 * mask - S2, "fro")
    return out


def matrix_l1(A):
    return np.max(np.sum(np.abs(A), axis=0))


class TestBand:
    def test_full_band(self, rng):
        S = rng.standard_normal((5, 5))
        np.testing.assert_array_equal(band(S, 4), S)

    def test_diagonal(self, rng):
        S = rng.standard_normal((5, 5))
        np.testing.assert_array_equal(band(S, 0), np.diag(np.diag(S)))

    def test_tridiagonal_pattern(self):
        expected = np.array([[1, 1, 0], [1, 1, 1], [0, 1, 1]], float)
        np.testing.assert_array_equal(band(np.ones((3, 3)), 1), expected)

    def test_domain(self):
        with pytest.raises(DomainError):
            band(np.ones((3, 3)), 3)
        with pytest.raises(DomainError):
            band(np.ones((3, 2)), 0)

    @settings(max_examples=50)
    @given(arrays(np.float64, st.tuples(st.integers(1, 8)).map(lambda t: (t[0], t[0])),
                  elements=st.floats(-10, 10)), st.data())
    def test_idempotent(self, S, data):
        k = data.draw(st.integers(0, S.shape[0] - 1))
        np.testing.assert_array_equal(band(band(S, k), k), band(S, k))


class TestCrossValidation:
    @pytest.mark.parametrize("n, p, kmax", [(13, 7, 6), (20, 30, 5), (9, 3, 2)])
    def test_risk_path_matches_naive(self, rng, n, p, kmax):
        X = rng.standard_normal((n, p)) * 3 + 10
        tr, va = random_splits(n, 5, rng)
        np.testing.assert_allclose(band_risk_path(X, tr, va, kmax), naive_risks(X, tr, va, kmax),
                                   rtol=1e-9, atol=1e-10)

    def test_split_sizes(self, rng):
        tr, va = random_splits(11, 3, rng)
        assert tr.shape == (3, 6) and va.shape == (3, 5)
        for a, b in zip(tr, va):
            assert sorted(np.concatenate([a, b])) == list(range(11))

    def test_kmax_zero(self, rng):
        assert cv_band_select(rng.standard_normal((20, 5)), kmax=0, rng=rng) == 0

    def test_preconditions(self, rng):
        with pytest.raises(DimensionError):
            cv_band_select(rng.standard_normal((7, 5)))
        with pytest.raises(DomainError):
            cv_band_select(rng.standard_normal((10, 5)), splits=1)

    def test_independent_coordinates_pick_small_band(self):
        picks = []
        for seed in range(50):
            r = np.random.default_rng(seed)
            picks.append(cv_band_select(r.standard_normal((200, 50)), rng=r))
        assert np.mean(np.array(picks) <= 3) >= 0.8

    def test_ar1_picks_positive_band(self):
        L = CovarianceSpec(p=50, rho=0.7).cholesky
        picks = []
        for seed in range(50):
            r = np.random.default_rng(seed)
            picks.append(cv_band_select(r.standard_normal((200, 50)) @ L.T, rng=r))
        assert np.mean(np.array(picks) >= 1) >= 0.8


class TestEstimatePrecision:
    def test_identity_truth(self):
        r = np.random.default_rng(5)
        est = estimate_precision(r.standard_normal((500, 20)), rng=r)
        assert np.max(np.abs(est.omega_hat - np.eye(20))) < 0.2

    def test_scalar(self, rng):
        x = rng.standard_normal((30, 1))
        est = estimate_precision(x, rng=rng)
        assert est.omega_hat[0, 0] == pytest.approx(1 / np.var(x, ddof=1), rel=1e-12)
        assert est.band_k == 0

    def test_invariants(self, rng):
        L = CovarianceSpec(p=60, rho=0.7).cholesky
        X = rng.standard_normal((40, 60)) @ L.T
        est = estimate_precision(X, rng=1)
        om = est.omega_hat
        assert np.max(np.abs(om - om.T)) <= 1e-10
        assert np.all(np.diag(om) > 0)
        S = band(sample_covariance(X), est.band_k) + est.ridge_tau * np.eye(60)
        assert np.max(np.abs(S @ om - np.eye(60))) <= 1e-8

    def test_ridge_applied_when_indefinite(self, rng):
        # p >> n with a wide band leaves the banded covariance indefinite
        X = rng.standard_normal((10, 40))
        est = estimate_precision(X, band_k=20)
        lam = np.linalg.eigvalsh(band(sample_covariance(X), 20))[0]
        assert lam < 1e-6
        assert est.ridge_tau == pytest.approx(1e-6 - lam, rel=1e-8)

    def test_deterministic(self, rng):
        X = rng.standard_normal((30, 12))
        a = estimate_precision(X, rng=9)
        b = estimate_precision(X, rng=9)
        np.testing.assert_array_equal(a.omega_hat, b.omega_hat)
        assert a.band_k == b.band_k

    def test_needs_n8(self, rng):
        with pytest.raises(DimensionError):
            estimate_precision(rng.standard_normal((7, 3)))

    def test_beats_unbanded_inverse(self):
        spec = CovarianceSpec(p=50, rho=0.5)
        wins = 0
        for seed in range(50):
            r = np.random.default_rng(1000 + seed)
            X = r.standard_normal((400, 50)) @ spec.cholesky.T
            banded = estimate_precision(X, rng=r).omega_hat
            raw = np.linalg.inv(sample_covariance(X))
            wins += matrix_l1(banded - spec.precision) < matrix_l1(raw - spec.precision)
        assert wins >= 40
