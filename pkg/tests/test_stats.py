import math

import numpy as np
import pytest
from scipy import integrate

from causetrigger import (
    FittedDistribution,
    RegressionFit,
    f_test_nested,
    fit_distribution_ks,
    fit_regression,
    gen_var_panel,
    select_lag_aic,
    standardize,
)
from causetrigger.errors import (
    DegenerateSeries,
    DegreesOfFreedomError,
    LagTooLarge,
    SingularDesign,
    TooFewSamples,
)
from causetrigger.stats import DISCRETE, GAMMA, GAUSSIAN, LOGNORMAL

from conftest import make_panel


def f_sf_oracle(s, df1, df2):
    """P(F > s) by numerical integration of the regularized incomplete beta.

    Uses the substitution t = u^2 to remove the t^(a-1) singularity at the
    origin (a = df1/2 = 1/2 in our tests).  Independent of scipy.stats.
    """
    a, b = df1 / 2.0, df2 / 2.0
    x = df1 * s / (df1 * s + df2)
    log_beta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)

    def integrand(u):
        return 2.0 * u ** (2 * a - 1) * (1 - u * u) ** (b - 1)

    value, _ = integrate.quad(integrand, 0.0, math.sqrt(x), limit=200)
    return 1.0 - value / math.exp(log_beta)


class TestFitDistributionKS:
    def test_gaussian_recovered(self, rng):
        draws = rng.normal(0.0, 1.0, 2000)
        fit = fit_distribution_ks(draws)
        assert fit.family == GAUSSIAN
        assert abs(fit.params["mean"]) < 0.1
        assert abs(fit.params["std"] - 1.0) < 0.1
        assert 0.0 <= fit.ks_statistic <= 1.0
        assert 0.0 <= fit.ks_pvalue <= 1.0

    def test_gamma_beats_gaussian(self, rng):
        draws = rng.gamma(2.0, 1.0, 2000)
        fit = fit_distribution_ks(draws)
        assert fit.family == GAMMA

    def test_lognormal_recognized(self, rng):
        draws = np.exp(rng.normal(0.0, 1.2, 2000))
        fit = fit_distribution_ks(draws)
        assert fit.family == LOGNORMAL

    def test_counts_recognized(self, rng):
        draws = rng.poisson(4.0, 2000).astype(float)
        fit = fit_distribution_ks(draws)
        assert fit.family == DISCRETE
        assert fit.params["rate"] == pytest.approx(draws.mean())

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            fit_distribution_ks(np.arange(10.0))

    def test_constant_vector_degenerate(self):
        with pytest.raises(DegenerateSeries):
            fit_distribution_ks(np.full(50, 3.0))

    def test_ks_statistic_is_sup_distance(self, rng):
        # Recompute the sup distance against the fitted CDF by brute force.
        from scipy import stats as sps

        draws = rng.normal(2.0, 3.0, 200)
        fit = fit_distribution_ks(draws)
        assert fit.family == GAUSSIAN
        cdf = sps.norm(fit.params["mean"], fit.params["std"]).cdf
        xs = np.sort(draws)
        n = len(xs)
        sup = 0.0
        for i, x in enumerate(xs):
            sup = max(sup, abs((i + 1) / n - cdf(x)), abs(i / n - cdf(x)))
        assert fit.ks_statistic == pytest.approx(sup, abs=1e-12)


class TestSelectLagAIC:
    def test_var2_recovered(self):
        p = 3
        A1 = 0.1 * np.eye(p)
        A2 = 0.5 * np.eye(p) + 0.1 * (np.ones((p, p)) - np.eye(p))
        hits = 0
        for seed in range(100):
            panel = gen_var_panel(p, 500, 2, np.stack([A1, A2]), 1.0, seed)
            if select_lag_aic(standardize(panel), 4) == 2:
                hits += 1
        assert hits >= 90

    def test_white_noise_prefers_one(self):
        hits = 0
        for seed in range(40):
            rng = np.random.default_rng(1000 + seed)
            panel = make_panel(
                {"a": rng.normal(size=300), "b": rng.normal(size=300)}
            )
            if select_lag_aic(standardize(panel), 4) == 1:
                hits += 1
        assert hits > 20

    def test_single_candidate(self, rng):
        panel = make_panel({"a": rng.normal(size=60), "b": rng.normal(size=60)})
        assert select_lag_aic(standardize(panel), 1) == 1

    def test_d_max_too_large(self, rng):
        panel = make_panel({"a": rng.normal(size=30)})
        with pytest.raises(LagTooLarge):
            select_lag_aic(standardize(panel), 10)


def gaussian_dist():
    return FittedDistribution(GAUSSIAN, {"mean": 0.0, "std": 1.0}, 0.0, 1.0)


class TestFitRegression:
    def test_exact_linear(self):
        x = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
        y = 2.0 + 3.0 * x
        fit = fit_regression(y, [x], gaussian_dist())
        np.testing.assert_allclose(fit.coefficients, [2.0, 3.0], atol=1e-6)
        assert fit.rss < 1e-10
        assert fit.n_params == 2

    def test_orthogonal_slope_zero(self):
        x = np.array([-1.0, 1.0, -1.0, 1.0, -1.0, 1.0])
        y = np.array([1.0, 1.0, -1.0, -1.0, 2.0, 2.0])  # sum(x*y) = 0
        fit = fit_regression(y, [x], gaussian_dist())
        assert abs(fit.coefficients[1]) < 1e-6

    def test_matches_normal_equations(self, rng):
        for _ in range(10):
            X = rng.normal(size=(80, 4))
            y = rng.normal(size=80)
            fit = fit_regression(y, list(X.T), gaussian_dist())
            A = np.column_stack([np.ones(80), X])
            beta = np.linalg.solve(A.T @ A, A.T @ y)
            np.testing.assert_allclose(fit.coefficients, beta, atol=1e-8)

    def test_rss_matches_recomputation(self, rng):
        X = rng.normal(size=(60, 3))
        y = rng.normal(size=60)
        fit = fit_regression(y, list(X.T), gaussian_dist())
        A = np.column_stack([np.ones(60), X])
        rss = float(np.sum((y - A @ fit.coefficients) ** 2))
        assert fit.rss == pytest.approx(rss, abs=1e-9)

    def test_duplicate_columns_singular(self, rng):
        x = rng.normal(size=50)
        with pytest.raises(SingularDesign):
            fit_regression(rng.normal(size=50), [x, x], gaussian_dist())

    def test_gamma_glm_against_irls_oracle(self, rng):
        # Independent textbook IRLS for the gamma/log-link model.
        r = 1000
        x = rng.normal(size=r)
        eta = 1.0 + 0.5 * x
        shape = 5.0
        y = np.exp(eta) * rng.gamma(shape, 1.0 / shape, size=r)

        A = np.column_stack([np.ones(r), x])
        beta = np.zeros(2)
        beta[0] = math.log(max(np.mean(y), 1e-8))
        for _ in range(200):
            mu = np.exp(A @ beta)
            z = A @ beta + (y - mu) / mu
            new_beta, *_ = np.linalg.lstsq(A, z, rcond=None)
            if np.max(np.abs(new_beta - beta)) < 1e-12:
                beta = new_beta
                break
            beta = new_beta

        dist = FittedDistribution(GAMMA, {"shape": shape, "scale": 1.0}, 0.0, 1.0)
        fit = fit_regression(y, [x], dist)
        np.testing.assert_allclose(fit.coefficients, beta, atol=1e-5)
        np.testing.assert_allclose(fit.coefficients, [1.0, 0.5], atol=0.1)

    def test_lognormal_reduces_to_ols_on_logs(self, rng):
        r = 200
        x = rng.normal(size=r)
        y = np.exp(0.5 + 0.3 * x + rng.normal(0, 0.2, r))
        dist = FittedDistribution(LOGNORMAL, {"mu": 0.0, "sigma": 1.0}, 0.0, 1.0)
        fit = fit_regression(y, [x], dist)
        A = np.column_stack([np.ones(r), x])
        beta = np.linalg.solve(A.T @ A, A.T @ np.log(y))
        np.testing.assert_allclose(fit.coefficients, beta, atol=1e-6)


class TestFTestNested:
    def _fit(self, rss, n_obs, n_params):
        return RegressionFit(
            coefficients=np.zeros(n_params),
            rss=rss,
            loglik=0.0,
            n_obs=n_obs,
            n_params=n_params,
        )

    def test_hand_arithmetic(self):
        # S = ((10-5)/1) / (5/100) = 100 at r = 103.
        res = f_test_nested(self._fit(10.0, 103, 2), self._fit(5.0, 103, 3))
        assert res.statistic == pytest.approx(100.0, abs=1e-12)
        assert res.df1 == 1
        assert res.df2 == 100

    def test_no_improvement_accepts(self):
        res = f_test_nested(self._fit(7.0, 50, 2), self._fit(7.0, 50, 3))
        assert res.statistic == 0.0
        assert not res.reject_h0

    def test_perfect_full_model_rejects(self):
        res = f_test_nested(self._fit(4.0, 50, 2), self._fit(0.0, 50, 3))
        assert math.isinf(res.statistic)
        assert res.p_value == 0.0
        assert res.reject_h0

    def test_both_zero_accepts(self):
        res = f_test_nested(self._fit(0.0, 50, 2), self._fit(0.0, 50, 3))
        assert res.statistic == 0.0
        assert not res.reject_h0

    def test_degrees_of_freedom_error(self):
        with pytest.raises(DegreesOfFreedomError):
            f_test_nested(self._fit(2.0, 3, 2), self._fit(1.0, 3, 3))

    def test_rescaling_invariance(self):
        a = f_test_nested(self._fit(10.0, 80, 2), self._fit(6.0, 80, 3))
        b = f_test_nested(self._fit(10.0 * 7.3, 80, 2), self._fit(6.0 * 7.3, 80, 3))
        assert a.statistic == pytest.approx(b.statistic, rel=1e-12)
        assert a.p_value == pytest.approx(b.p_value, rel=1e-12)

    def test_pvalues_match_integration_oracle(self, rng):
        for _ in range(50):
            s = float(rng.uniform(0.01, 12.0))
            df2 = int(rng.integers(5, 400))
            res = f_test_nested(
                self._fit(1.0 + s / df2, df2 + 3, 2),
                self._fit(1.0, df2 + 3, 3),
            )
            assert res.statistic == pytest.approx(s, rel=1e-9)
            assert res.p_value == pytest.approx(
                f_sf_oracle(s, 1, df2), abs=1e-6
            )

    def test_null_calibration(self):
        rejections = 0
        n_sims = 2000
        for seed in range(n_sims):
            rng = np.random.default_rng(seed)
            V = rng.normal(size=200)
            xs = rng.normal(size=200)
            y = 1.0 + 0.5 * V + rng.normal(size=200)
            reduced = fit_regression(y, [V], gaussian_dist())
            full = fit_regression(y, [V, V * xs], gaussian_dist())
            if f_test_nested(reduced, full, 0.05).reject_h0:
                rejections += 1
        rate = rejections / n_sims
        assert 0.035 <= rate <= 0.065
