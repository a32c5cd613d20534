"""Distribution fitting, lag selection, regression and the nested F-test.

The regression layer supports a small set of exponential-family response
distributions behind one interface: gaussian (identity link, plain OLS),
gamma and a discretized-count family (log link, IRLS), and lognormal
(least squares on the log response).  The moderation step and the subset
search both consume :func:`fit_regression`, so its residual sum of squares
is always reported on the response scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special
from scipy import stats as sps

from .errors import (
    DegenerateSeries,
    DegreesOfFreedomError,
    LagTooLarge,
    SingularDesign,
    TooFewSamples,
)
from .panel import StandardizedPanel

GAUSSIAN = "gaussian"
GAMMA = "gamma"
LOGNORMAL = "lognormal"
DISCRETE = "poisson-like-discrete"

FAMILIES = (GAUSSIAN, GAMMA, LOGNORMAL, DISCRETE)

# Below this relative singular value the design counts as rank-deficient;
# above it a small ridge keeps near-collinear (standardized climate) columns
# solvable.
_RANK_RTOL = 1e-10
_RIDGE = 1e-8

_MIN_FIT_SAMPLES = 20


@dataclass(frozen=True)
class FittedDistribution:
    """Best-fitting response family with its KS goodness-of-fit."""

    family: str
    params: dict
    ks_statistic: float
    ks_pvalue: float


@dataclass(frozen=True)
class RegressionFit:
    """Maximum-likelihood regression result (intercept first)."""

    coefficients: np.ndarray
    rss: float
    loglik: float
    n_obs: int
    n_params: int

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=float)
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)


@dataclass(frozen=True)
class FTestResult:
    statistic: float
    df1: int
    df2: int
    p_value: float
    reject_h0: bool
    alpha: float


# ---------------------------------------------------------------------------
# Distribution fitting
# ---------------------------------------------------------------------------


def _ks_continuous(sorted_data: np.ndarray, cdf_values: np.ndarray) -> float:
    """Sup distance between the empirical CDF and a fitted continuous CDF."""
    n = len(sorted_data)
    grid = np.arange(1, n + 1) / n
    d_plus = np.max(grid - cdf_values)
    d_minus = np.max(cdf_values - (grid - 1.0 / n))
    return float(max(d_plus, d_minus, 0.0))


def _ks_pvalue(statistic: float, n: int) -> float:
    # Asymptotic Kolmogorov distribution; the bias from fitting parameters on
    # the same sample is accepted and documented.
    return float(special.kolmogorov(math.sqrt(n) * statistic))


def _fit_gaussian(x):
    mu = float(np.mean(x))
    sigma = float(np.std(x))
    if sigma <= 0:
        return None
    return {"mean": mu, "std": sigma}, sps.norm(loc=mu, scale=sigma).cdf


def _solve_gamma_shape(s):
    """Newton iteration for k in log(k) - digamma(k) = s."""
    if s <= 0 or not np.isfinite(s):
        return None
    k = (3.0 - s + math.sqrt((s - 3.0) ** 2 + 24.0 * s)) / (12.0 * s)
    for _ in range(50):
        num = math.log(k) - special.digamma(k) - s
        den = 1.0 / k - special.polygamma(1, k)
        k_new = k - num / den
        if k_new <= 0:
            k_new = k / 2.0
        if abs(k_new - k) < 1e-12 * max(1.0, k):
            k = k_new
            break
        k = k_new
    return k


def _gamma_shape_mle(x):
    return _solve_gamma_shape(math.log(np.mean(x)) - float(np.mean(np.log(x))))


def _fit_gamma(x):
    if np.any(x <= 0):
        return None
    k = _gamma_shape_mle(x)
    if k is None or not np.isfinite(k) or k <= 0:
        return None
    theta = float(np.mean(x)) / k
    return {"shape": k, "scale": theta}, sps.gamma(a=k, scale=theta).cdf


def _fit_lognormal(x):
    if np.any(x <= 0):
        return None
    logs = np.log(x)
    mu = float(np.mean(logs))
    sigma = float(np.std(logs))
    if sigma <= 0:
        return None
    params = {"mu": mu, "sigma": sigma}
    return params, sps.lognorm(s=sigma, scale=math.exp(mu)).cdf


def fit_distribution_ks(series: Sequence[float]) -> FittedDistribution:
    """Fit each applicable family by ML; keep the smallest KS statistic.

    Families whose support excludes the data (negative values for gamma and
    lognormal, non-integers for the count family) are skipped.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if len(x) < _MIN_FIT_SAMPLES:
        raise TooFewSamples(
            f"{len(x)} samples; distribution fitting needs >= {_MIN_FIT_SAMPLES}"
        )
    if np.ptp(x) == 0.0:
        raise DegenerateSeries("constant series has no usable empirical CDF")

    candidates = []
    xs = np.sort(x)
    n = len(x)

    for family, fitter in (
        (GAUSSIAN, _fit_gaussian),
        (GAMMA, _fit_gamma),
        (LOGNORMAL, _fit_lognormal),
    ):
        fit = fitter(x)
        if fit is None:
            continue
        params, cdf = fit
        stat = _ks_continuous(xs, cdf(xs))
        candidates.append(
            FittedDistribution(family, params, stat, _ks_pvalue(stat, n))
        )

    discrete = _fit_discrete(x)
    if discrete is not None:
        candidates.append(discrete)

    if not candidates:
        raise DegenerateSeries("no distribution family admits the data")
    return min(candidates, key=lambda c: c.ks_statistic)


def _fit_discrete(x):
    if np.any(x < 0) or np.any(np.abs(x - np.round(x)) > 1e-8):
        return None
    lam = float(np.mean(x))
    if lam <= 0:
        return None
    n = len(x)
    support = np.arange(0, int(np.max(x)) + 1)
    fitted = sps.poisson(mu=lam).cdf(support)
    empirical = np.searchsorted(np.sort(np.round(x)), support, side="right") / n
    # Both CDFs are right-continuous steps on the integers, so the sup over
    # the whole line is attained at the atoms or just left of them.
    d_at = np.max(np.abs(empirical - fitted))
    emp_left = np.concatenate([[0.0], empirical[:-1]])
    fit_left = np.concatenate([[0.0], fitted[:-1]])
    d_left = np.max(np.abs(emp_left - fit_left))
    stat = float(max(d_at, d_left))
    return FittedDistribution(
        DISCRETE, {"rate": lam}, stat, _ks_pvalue(stat, n)
    )


# ---------------------------------------------------------------------------
# VAR lag selection
# ---------------------------------------------------------------------------


def select_lag_aic(panel: StandardizedPanel, d_max: int) -> int:
    """Lowest-AIC VAR order in 1..d_max, estimated on a common sample.

    AIC = -2 loglik + 2k with k the number of estimated coefficients
    (intercepts included).  Ties break toward the smaller order.
    """
    T, p = panel.values.shape
    if d_max < 1:
        raise ValueError("d_max must be >= 1")
    if d_max >= T / 3:
        raise LagTooLarge(f"d_max {d_max} >= T/3 with T={T}")

    values = panel.values
    best_d, best_aic = None, np.inf
    for d in range(1, d_max + 1):
        # Common estimation sample: rows d_max .. T-1 regardless of d.
        rows = []
        for lag in range(1, d + 1):
            rows.append(values[d_max - lag : T - lag])
        X = np.hstack([np.ones((T - d_max, 1))] + rows)
        Y = values[d_max:]
        n_eff = T - d_max
        coef, *_ = np.linalg.lstsq(X, Y, rcond=None)
        resid = Y - X @ coef
        sigma = resid.T @ resid / n_eff
        sign, logdet = np.linalg.slogdet(sigma)
        if sign <= 0:
            continue
        loglik = -0.5 * n_eff * (p * math.log(2 * math.pi) + logdet + p)
        k = p * (p * d + 1)
        aic = -2.0 * loglik + 2.0 * k
        if aic < best_aic:
            best_d, best_aic = d, aic
    if best_d is None:
        raise DegenerateSeries("VAR residual covariance was singular at every lag")
    return best_d


# ---------------------------------------------------------------------------
# Regression
# ---------------------------------------------------------------------------


def _design_with_intercept(design_columns, r):
    cols = [np.ones(r)]
    for c in design_columns:
        c = np.asarray(c, dtype=float)
        if c.shape != (r,):
            raise ValueError("all design columns must match the response length")
        cols.append(c)
    return np.column_stack(cols)


def _check_rank(X):
    s = np.linalg.svd(X, compute_uv=False)
    if s[0] <= 0 or s[-1] / s[0] < _RANK_RTOL:
        raise SingularDesign(
            f"design is rank-deficient (relative smallest singular value "
            f"{0.0 if s[0] <= 0 else s[-1] / s[0]:.2e})"
        )


def _solve_ls(X, z, weights=None):
    if weights is None:
        XtX = X.T @ X
        Xtz = X.T @ z
    else:
        Xw = X * weights[:, None]
        XtX = X.T @ Xw
        Xtz = Xw.T @ z
    XtX = XtX + _RIDGE * np.eye(XtX.shape[0])
    return np.linalg.solve(XtX, Xtz)


def _gaussian_loglik(rss, r):
    sigma2 = max(rss / r, 1e-300)
    return -0.5 * r * (math.log(2 * math.pi * sigma2) + 1.0)


def _irls_log_link(X, y, variance):
    """IRLS for a log-link GLM; ``variance`` maps mu to Var(y)/dispersion."""
    r = len(y)
    mu = np.clip(y, 1e-8, None)
    mu = 0.9 * mu + 0.1 * float(np.mean(mu))
    eta = np.log(mu)
    beta = None
    for _ in range(100):
        z = eta + (y - mu) / mu
        w = mu**2 / variance(mu)
        new_beta = _solve_ls(X, z, weights=w)
        eta = np.clip(X @ new_beta, -30.0, 30.0)
        mu = np.exp(eta)
        if beta is not None and np.max(np.abs(new_beta - beta)) < 1e-10:
            beta = new_beta
            break
        beta = new_beta
    return beta, mu


def fit_regression(
    responses: Sequence[float],
    design_columns: Sequence[Sequence[float]],
    distribution: FittedDistribution,
) -> RegressionFit:
    """ML regression of the response on the given columns plus an intercept.

    Links are canonical per family: identity for gaussian (ordinary least
    squares), log for gamma and the count family, and the lognormal response
    is fitted by least squares on its logarithm.  ``rss`` is always the
    residual sum of squares on the response scale.
    """
    y = np.asarray(responses, dtype=float)
    r = len(y)
    n_params = len(design_columns) + 1
    if r <= n_params:
        raise DegreesOfFreedomError(
            f"{r} observations cannot identify {n_params} parameters"
        )
    X = _design_with_intercept(design_columns, r)
    _check_rank(X)
    family = distribution.family

    if family == GAUSSIAN:
        beta = _solve_ls(X, y)
        resid = y - X @ beta
        rss = float(resid @ resid)
        loglik = _gaussian_loglik(rss, r)
    elif family == LOGNORMAL:
        if np.any(y <= 0):
            raise ValueError("lognormal family requires a positive response")
        logy = np.log(y)
        beta = _solve_ls(X, logy)
        log_resid = logy - X @ beta
        sigma2 = max(float(log_resid @ log_resid) / r, 1e-300)
        mu = np.exp(X @ beta)
        rss = float(np.sum((y - mu) ** 2))
        loglik = (
            -0.5 * r * (math.log(2 * math.pi * sigma2) + 1.0) - float(np.sum(logy))
        )
    elif family == GAMMA:
        if np.any(y <= 0):
            raise ValueError("gamma family requires a positive response")
        beta, mu = _irls_log_link(X, y, variance=lambda m: m**2)
        rss = float(np.sum((y - mu) ** 2))
        ratio = np.clip(y / mu, 1e-12, None)
        # Profile likelihood in the shape: log k - digamma(k) equals
        # mean(ratio) - mean(log ratio) - 1 at the optimum.
        k = _solve_gamma_shape(
            float(np.mean(ratio)) - float(np.mean(np.log(ratio))) - 1.0
        )
        if k is None or not np.isfinite(k) or k <= 0:
            k = 1.0
        loglik = float(
            np.sum(
                (k - 1.0) * np.log(y)
                - k * y / mu
                - k * (np.log(mu) - math.log(k))
                - special.gammaln(k)
            )
        )
    elif family == DISCRETE:
        if np.any(y < 0):
            raise ValueError("count family requires a nonnegative response")
        beta, mu = _irls_log_link(X, y, variance=lambda m: m)
        rss = float(np.sum((y - mu) ** 2))
        loglik = float(np.sum(y * np.log(mu) - mu - special.gammaln(y + 1.0)))
    else:
        raise ValueError(f"unknown family {family!r}")

    return RegressionFit(
        coefficients=beta,
        rss=rss,
        loglik=float(loglik),
        n_obs=r,
        n_params=n_params,
    )


# ---------------------------------------------------------------------------
# Nested F-test
# ---------------------------------------------------------------------------

_RSS_FLOOR = 1e-12


def f_test_nested(
    fit_reduced: RegressionFit,
    fit_full: RegressionFit,
    alpha: float = 0.05,
) -> FTestResult:
    """F-test of one nested coefficient: S = (RSS1 - RSS2) / (RSS2 / df2).

    A numerically-zero RSS2 against a nonzero RSS1 yields an infinite
    statistic and rejection; both zero yields S = 0 and acceptance.
    """
    if fit_full.n_params != fit_reduced.n_params + 1:
        raise ValueError("full fit must have exactly one extra parameter")
    if fit_full.n_obs != fit_reduced.n_obs:
        raise ValueError("nested fits must share the same observations")
    rss1, rss2 = fit_reduced.rss, fit_full.rss
    if rss2 > rss1 + 1e-9:
        raise ValueError("full-model RSS exceeds reduced-model RSS")
    df1 = 1
    df2 = fit_full.n_obs - fit_full.n_params
    if df2 <= 0:
        raise DegreesOfFreedomError(f"df2 = {df2} <= 0")

    if rss2 < _RSS_FLOOR:
        if rss1 < _RSS_FLOOR:
            return FTestResult(0.0, df1, df2, 1.0, False, alpha)
        return FTestResult(math.inf, df1, df2, 0.0, True, alpha)

    statistic = ((rss1 - rss2) / df1) / (rss2 / df2)
    statistic = max(statistic, 0.0)
    p_value = float(sps.f.sf(statistic, df1, df2))
    return FTestResult(
        statistic=float(statistic),
        df1=df1,
        df2=df2,
        p_value=p_value,
        reject_h0=bool(p_value < alpha),
        alpha=alpha,
    )
