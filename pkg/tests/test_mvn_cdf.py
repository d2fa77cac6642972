import math

import numpy as np
import pytest

from conftest import random_pd
from phiprod import oracles
from phiprod.gauss_scalar import cdf as scalar_cdf
from phiprod.mvn_cdf import MvnEstimate, MvnQuery, bivariate_cdf, cdf
from phiprod.pd_matrix import PdMatrix


def _query(upper, mean, entries, **kw):
    n = len(upper)
    return MvnQuery(upper=np.asarray(upper, dtype=float),
                    mean=np.asarray(mean, dtype=float),
                    cov=PdMatrix.from_entries(n, entries), **kw)


class TestExactPaths:
    def test_univariate_median(self):
        est = cdf(_query([1.3], [1.3], [[2.0]]))
        assert est.value == 0.5
        assert est.method == "univariate"
        assert est.err_estimate == 0.0

    def test_univariate_scales(self):
        est = cdf(_query([2.0], [0.0], [[4.0]]))
        assert est.value == pytest.approx(scalar_cdf(1.0), abs=1e-15)

    def test_orthant_at_half_correlation(self):
        # correlation +1/2 gives exactly 1/3, -1/2 gives 1/6
        est = cdf(_query([0.0, 0.0], [0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]]))
        assert est.method == "bivariate_owen"
        assert est.value == pytest.approx(1.0 / 3.0, abs=1e-12)
        est = cdf(_query([0.0, 0.0], [0.0, 0.0], [[1.0, -0.5], [-0.5, 1.0]]))
        assert est.value == pytest.approx(1.0 / 6.0, abs=1e-12)

    def test_three_dim_independent(self):
        est = cdf(_query([0.0] * 3, [0.0] * 3, np.eye(3)))
        assert est.method == "qmc_genz"
        assert est.value == pytest.approx(0.125, abs=1e-9)

    def test_infinite_upper_marginalizes(self):
        est = cdf(_query([0.7, math.inf], [0.0, 0.0], [[1.0, 0.6], [0.6, 1.0]]))
        assert est.method == "univariate"
        assert est.value == pytest.approx(scalar_cdf(0.7), abs=1e-15)

    def test_all_infinite_upper_is_one(self):
        est = cdf(_query([math.inf, math.inf], [0.0, 0.0], np.eye(2)))
        assert est.value == 1.0


class TestBivariate:
    @pytest.mark.parametrize("rho", [-0.9, -0.5, 0.0, 0.5, 0.9])
    def test_origin_matches_arcsine(self, rho):
        expected = 0.25 + math.asin(rho) / (2.0 * math.pi)
        assert bivariate_cdf(0.0, 0.0, rho) == pytest.approx(expected, abs=1e-10)

    def test_independent_origin(self):
        assert bivariate_cdf(0.0, 0.0, 0.0) == pytest.approx(0.25, abs=1e-14)

    def test_matches_conditioning_quadrature(self):
        for h in np.linspace(-2.5, 2.5, 7):
            for k in np.linspace(-2.5, 2.5, 7):
                for rho in (-0.85, -0.4, 0.0, 0.3, 0.75):
                    ref = oracles.bivariate_cdf_quad(float(h), float(k), float(rho))
                    got = bivariate_cdf(float(h), float(k), float(rho))
                    assert abs(got - ref) <= 1e-10

    def test_complement_identity(self):
        # Phi2(h, k, rho) + Phi2(h, -k, -rho) = Phi(h)
        for h in np.linspace(-2.0, 2.0, 9):
            for k in np.linspace(-2.0, 2.0, 9):
                for rho in (-0.8, -0.3, 0.4, 0.9):
                    total = (bivariate_cdf(float(h), float(k), float(rho))
                             + bivariate_cdf(float(h), float(-k), float(-rho)))
                    assert abs(total - scalar_cdf(float(h))) <= 1e-9

    @pytest.mark.parametrize("rho", [1.0 - 1e-13, -(1.0 - 1e-13), 1.0, -1.5])
    def test_degenerate_correlation_rejected(self, rho):
        with pytest.raises(ValueError):
            bivariate_cdf(0.3, -0.2, rho)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            bivariate_cdf(math.inf, 0.0, 0.5)


class TestQmcPath:
    def test_agrees_with_monte_carlo_n4(self, rng):
        cov = random_pd(rng, 4)
        q = MvnQuery(upper=rng.uniform(-1.0, 2.0, 4), mean=rng.uniform(-1.0, 1.0, 4),
                     cov=cov, accuracy=1e-6)
        est = cdf(q, seed=3)
        mc, se = oracles.mvn_mc(q, draws=10_000_000, seed=17)
        combined = math.sqrt(se * se + (est.err_estimate / 3.0) ** 2)
        assert abs(est.value - mc) <= 3.0 * combined

    def test_forced_qmc_matches_bivariate_grid(self):
        for h in np.linspace(-1.8, 1.8, 10):
            for k in np.linspace(-1.8, 1.8, 10):
                for rho in np.linspace(-0.8, 0.8, 9):
                    q = _query([h, k], [0.0, 0.0],
                               [[1.0, rho], [rho, 1.0]], accuracy=5e-4)
                    est = cdf(q, seed=11, method="qmc")
                    exact = bivariate_cdf(float(h), float(k), float(rho))
                    assert est.method == "qmc_genz"
                    assert abs(est.value - exact) <= max(3.0 * est.err_estimate, 1e-7)

    def test_monotone_in_upper(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 6))
            cov = random_pd(rng, n)
            upper = rng.uniform(-1.5, 1.5, n)
            mean = rng.uniform(-1.0, 1.0, n)
            lo = cdf(MvnQuery(upper=upper, mean=mean, cov=cov, accuracy=1e-5), seed=5)
            bumped = upper.copy()
            bumped[int(rng.integers(0, n))] += 0.5
            hi = cdf(MvnQuery(upper=bumped, mean=mean, cov=cov, accuracy=1e-5), seed=5)
            assert hi.value >= lo.value - (lo.err_estimate + hi.err_estimate)

    def test_marginalization_consistency(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 6))
            cov = random_pd(rng, n)
            upper = rng.uniform(-1.5, 1.5, n)
            mean = rng.uniform(-1.0, 1.0, n)
            padded = upper.copy()
            padded[-1] = math.inf
            full = cdf(MvnQuery(upper=padded, mean=mean, cov=cov, accuracy=1e-5), seed=9)
            sub = cdf(MvnQuery(
                upper=upper[:-1], mean=mean[:-1],
                cov=PdMatrix.from_entries(n - 1, cov.entries[:n - 1, :n - 1]),
                accuracy=1e-5), seed=9)
            slack = full.err_estimate + sub.err_estimate + 1e-12
            assert abs(full.value - sub.value) <= slack

    def test_deterministic_given_seed(self, rng):
        cov = random_pd(rng, 4)
        q = MvnQuery(upper=rng.uniform(-1, 2, 4), mean=np.zeros(4), cov=cov)
        assert cdf(q, seed=123) == cdf(q, seed=123)

    def test_budget_exhaustion_flags_error_not_raises(self, rng):
        cov = random_pd(rng, 5)
        q = MvnQuery(upper=rng.uniform(-1, 1, 5), mean=np.zeros(5), cov=cov,
                     accuracy=1e-9, max_samples=12 * 4096)
        est = cdf(q, seed=0)
        assert isinstance(est, MvnEstimate)
        assert est.err_estimate > 0.0


class TestQueryValidation:
    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            _query([0.0, 0.0], [0.0], np.eye(2))

    def test_rejects_negative_infinity_upper(self):
        with pytest.raises(ValueError):
            _query([-math.inf, 0.0], [0.0, 0.0], np.eye(2))

    def test_rejects_nan_mean(self):
        with pytest.raises(ValueError):
            _query([0.0], [math.nan], [[1.0]])

    @pytest.mark.parametrize("accuracy", [0.0, -1e-3, 0.2])
    def test_accuracy_domain(self, accuracy):
        with pytest.raises(ValueError):
            _query([0.0], [0.0], [[1.0]], accuracy=accuracy)

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            cdf(_query([0.0], [0.0], [[1.0]]), method="exact")

    def test_estimate_within_unit_interval(self, rng):
        for _ in range(10):
            cov = random_pd(rng, 3)
            q = MvnQuery(upper=rng.uniform(-3, 3, 3), mean=np.zeros(3), cov=cov,
                         accuracy=1e-4)
            est = cdf(q, seed=2)
            assert 0.0 <= est.value <= 1.0
            assert est.err_estimate >= 0.0
