"""Peaks-over-threshold fitting and threshold diagnostics.

Three tail models are fitted by maximum likelihood to the exceedances of a
sample over a threshold ``u``:

* generalized Pareto (GPD) for the excesses ``x - u``,
* exponential, the ``xi = 0`` submodel of the GPD,
* the point-process (PP) model in GEV parameterization ``(mu, sigma, xi)``.

Fits use Nelder-Mead on the negative log-likelihood. Standard errors come
from the inverse of a central finite-difference Hessian.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, stats

from .errors import (
    ConsistencyError,
    ConvergenceError,
    DegenerateSampleError,
    DomainError,
)

# |xi| below this uses the exponential / Gumbel limit
XI_EPS = 1e-6
MAX_ITER = 2000
SIMPLEX_TOL = 1e-10
HESS_STEP = 1e-5
# observations per PP time block; 365.25 treats each record as one day
DAYS_PER_YEAR = 365.25


@dataclass(frozen=True)
class ExcessSample:
    """A sample together with a threshold and its exceedances."""

    values: np.ndarray
    threshold: float
    excesses: np.ndarray
    n: int
    n_u: int

    @classmethod
    def from_sample(cls, values, threshold: float) -> "ExcessSample":
        x = np.asarray(values, dtype=float).ravel()
        if not np.all(np.isfinite(x)):
            raise DomainError("sample contains non-finite values")
        u = float(threshold)
        exc = np.sort(x[x > u] - u)
        return cls(values=x, threshold=u, excesses=exc, n=int(x.size), n_u=int(exc.size))

    @property
    def tail_prob(self) -> float:
        """Empirical survival probability at the threshold, n_u / n."""
        return self.n_u / self.n


@dataclass(frozen=True)
class GpdParams:
    """Generalized Pareto law for excesses over ``threshold``."""

    scale: float
    shape: float
    threshold: float = 0.0

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError(f"GPD scale must be positive, got {self.scale}")

    @property
    def upper_endpoint(self) -> float:
        """Right end of the support in data units (inf unless shape < 0)."""
        if self.shape < 0:
            return self.threshold - self.scale / self.shape
        return math.inf

    def as_dict(self):
        return {"scale": self.scale, "shape": self.shape, "threshold": self.threshold}


@dataclass(frozen=True)
class GevParams:
    loc: float
    scale: float
    shape: float

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError(f"GEV scale must be positive, got {self.scale}")

    def as_dict(self):
        return {"loc": self.loc, "scale": self.scale, "shape": self.shape}


@dataclass(frozen=True)
class FitResult:
    """Maximum-likelihood fit of one tail model.

    ``params`` is a :class:`GpdParams` or :class:`GevParams`. ``names`` lists
    the free parameters in the order used by ``estimates``, ``standard_errors``
    and ``ci95``.
    """

    model: str
    params: object
    names: tuple[str, ...]
    estimates: tuple[float, ...]
    standard_errors: tuple[float, ...]
    loglik: float
    n_eff: int
    converged: bool = True
    iterations: int = 0
    threshold: float = math.nan
    covariance: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def k(self) -> int:
        return len(self.estimates)

    @property
    def aic(self) -> float:
        return 2 * self.k - 2 * self.loglik

    @property
    def bic(self) -> float:
        return self.k * math.log(self.n_eff) - 2 * self.loglik

    @property
    def ci95(self) -> tuple[tuple[float, float], ...]:
        return tuple(
            (e - 1.96 * s, e + 1.96 * s) for e, s in zip(self.estimates, self.standard_errors)
        )

    def to_dict(self) -> dict:
        def num(v):
            return None if not math.isfinite(v) else float(v)

        return {
            "model": self.model,
            "threshold": num(self.threshold),
            "params": {k: float(v) for k, v in zip(self.names, self.estimates)},
            "standard_errors": {k: num(v) for k, v in zip(self.names, self.standard_errors)},
            "ci95": {k: [num(lo), num(hi)] for k, (lo, hi) in zip(self.names, self.ci95)},
            "loglik": float(self.loglik),
            "aic": float(self.aic),
            "bic": float(self.bic),
            "n_eff": self.n_eff,
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
        }


@dataclass(frozen=True)
class PoissonRate:
    """Annual event rate with goodness-of-fit p-values.

    ``gof_pvalue`` comes from a parametric bootstrap of the discrete KS
    statistic; ``naive_ks_pvalue`` is the textbook continuous-KS p-value.
    """

    rate: float
    gof_pvalue: float
    naive_ks_pvalue: float
    ks_statistic: float
    total: int
    years: int
    n_boot: int

    def to_dict(self):
        return {
            "rate": self.rate,
            "gof_pvalue": self.gof_pvalue,
            "naive_ks_pvalue": self.naive_ks_pvalue,
            "ks_statistic": self.ks_statistic,
            "total": self.total,
            "years": self.years,
            "n_boot": self.n_boot,
        }


@dataclass(frozen=True)
class MrlPoint:
    threshold: float
    mean_excess: float
    lo: float
    hi: float
    n_u: int
    error: str | None = None


@dataclass(frozen=True)
class StabilityPoint:
    threshold: float
    n_u: int
    shape: float
    shape_ci: tuple[float, float]
    modified_scale: float
    modified_scale_ci: tuple[float, float]
    flag: str | None = None


# ---------------------------------------------------------------------------
# likelihoods


def gpd_negloglik(scale: float, shape: float, excesses) -> float:
    """Negative GPD log-likelihood of excesses; +inf outside the support."""
    y = np.asarray(excesses, dtype=float)
    if not scale > 0:
        return math.inf
    n = y.size
    if abs(shape) < XI_EPS:
        return n * math.log(scale) + y.sum() / scale
    z = shape * y / scale
    if np.any(z <= -1.0):
        return math.inf
    return n * math.log(scale) + (1.0 + 1.0 / shape) * np.log1p(z).sum()


def pp_negloglik(params, sample, u: float, n_blocks: float = 1.0) -> float:
    """Negative point-process log-likelihood.

    .. math::

        -\\ell = n_u\\ln\\sigma + (1+1/\\xi)\\sum\\ln(1+\\xi(x_i-\\mu)/\\sigma)
                 + n_b\\,(1+\\xi(u-\\mu)/\\sigma)^{-1/\\xi}

    with the sum over observations above ``u``. ``n_blocks`` (``n_b``) is the
    length of the observation window in GEV block units; with the default 1
    the whole sample counts as a single block.

    Parameters
    ----------
    params : GevParams or sequence of (loc, scale, shape)
    sample : array_like
        Full sample; values at or below ``u`` do not enter.
    u : float
    n_blocks : float

    Returns
    -------
    float
        ``inf`` when the parameters violate the support constraints.
    """
    if isinstance(params, GevParams):
        mu, sigma, xi = params.loc, params.scale, params.shape
    else:
        mu, sigma, xi = (float(p) for p in params)
    if not sigma > 0:
        return math.inf
    x = np.asarray(sample, dtype=float)
    x = x[x > u]
    n_u = x.size
    if abs(xi) < XI_EPS:
        return (
            n_u * math.log(sigma)
            + ((x - mu) / sigma).sum()
            + n_blocks * math.exp(-(u - mu) / sigma)
        )
    zx = xi * (x - mu) / sigma
    zu = xi * (u - mu) / sigma
    if zu <= -1.0 or np.any(zx <= -1.0):
        return math.inf
    return (
        n_u * math.log(sigma)
        + (1.0 / xi + 1.0) * np.log1p(zx).sum()
        + n_blocks * math.exp(-math.log1p(zu) / xi)
    )


# ---------------------------------------------------------------------------
# optimization helpers


def _nelder_mead(fun: Callable, x0, what: str):
    x0 = np.asarray(x0, dtype=float)
    res = optimize.minimize(
        fun,
        x0,
        method="Nelder-Mead",
        options={
            "maxiter": MAX_ITER,
            "maxfev": 2 * MAX_ITER * x0.size,
            "xatol": SIMPLEX_TOL,
            "fatol": SIMPLEX_TOL,
            "adaptive": False,
        },
    )
    if not res.success or not np.isfinite(res.fun):
        raise ConvergenceError(
            f"{what}: Nelder-Mead stopped without converging ({res.message})",
            best=res.x,
            iterations=res.nit,
        )
    return res


def _hessian(fun: Callable, x) -> np.ndarray:
    """Central finite-difference Hessian with relative step ``HESS_STEP``."""
    x = np.asarray(x, dtype=float)
    k = x.size
    h = HESS_STEP * np.maximum(np.abs(x), 1e-2)
    H = np.empty((k, k))
    f0 = fun(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (fun(x + ei) - 2 * f0 + fun(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                fun(x + ei + ej) - fun(x + ei - ej) - fun(x - ei + ej) + fun(x - ei - ej)
            ) / (4 * h[i] * h[j])
    return H


def _covariance(fun, x):
    H = _hessian(fun, x)
    if not np.all(np.isfinite(H)):
        return np.full((x.size, x.size), np.nan)
    try:
        cov = np.linalg.inv(H)
    except np.linalg.LinAlgError:
        return np.full((x.size, x.size), np.nan)
    if np.any(np.diag(cov) <= 0):
        return np.full((x.size, x.size), np.nan)
    return cov


def _se(cov):
    return tuple(float(math.sqrt(v)) if v > 0 else math.nan for v in np.diag(cov))


def _coerce(sample_or_excess, threshold=None) -> ExcessSample:
    if isinstance(sample_or_excess, ExcessSample):
        return sample_or_excess
    if threshold is None:
        # bare excesses over an implicit threshold of 0
        return ExcessSample.from_sample(np.asarray(sample_or_excess, dtype=float), 0.0)
    return ExcessSample.from_sample(sample_or_excess, threshold)


def pwm_start(excesses) -> tuple[float, float]:
    """Probability-weighted-moment estimates ``(scale, shape)`` for a GPD.

    Uses plotting positions ``(i - 0.35)/n``. The shape is clipped to
    ``[-0.45, 0.45]`` and the scale raised if needed so that every excess
    lies inside the support.
    """
    y = np.sort(np.asarray(excesses, dtype=float))
    n = y.size
    p = (np.arange(1, n + 1) - 0.35) / n
    a0 = y.mean()
    a1 = np.mean((1 - p) * y)
    d = a0 - 2 * a1
    if d > 0:
        scale = 2 * a0 * a1 / d
        shape = 2 - a0 / d
    else:
        scale, shape = a0, 0.0
    shape = float(np.clip(shape, -0.45, 0.45))
    scale = float(max(scale, 1e-8 * max(a0, 1.0)))
    if shape < 0:
        scale = max(scale, -shape * y.max() * 1.01)
    return scale, shape


# ---------------------------------------------------------------------------
# fits


def fit_gpd(excess_sample, threshold=None) -> FitResult:
    """Maximum-likelihood GPD fit to threshold excesses.

    Parameters
    ----------
    excess_sample : ExcessSample or array_like
        Either an :class:`ExcessSample`, or raw data together with
        ``threshold``, or (with ``threshold=None``) the excesses themselves.

    Returns
    -------
    FitResult
        Parameters ``(scale, shape)``. BIC uses ``n_eff = n_u``.

    Raises
    ------
    DegenerateSampleError
        Fewer than 5 excesses or all excesses equal.
    ConvergenceError
        Nelder-Mead hit its iteration limit.
    """
    es = _coerce(excess_sample, threshold)
    y = es.excesses
    if es.n_u < 5:
        raise DegenerateSampleError(f"GPD fit needs at least 5 excesses, got {es.n_u}")
    if np.ptp(y) == 0:
        raise DegenerateSampleError("all excesses are equal")
    scale0, shape0 = pwm_start(y)

    # optimize on log-scale so the simplex never leaves scale > 0
    def nll(theta):
        return gpd_negloglik(math.exp(theta[0]), theta[1], y)

    res = _nelder_mead(nll, [math.log(scale0), shape0], "GPD fit")
    scale, shape = math.exp(res.x[0]), float(res.x[1])

    def nll_nat(theta):
        return gpd_negloglik(theta[0], theta[1], y)

    cov = _covariance(nll_nat, np.array([scale, shape]))
    return FitResult(
        model="gpd",
        params=GpdParams(scale, shape, es.threshold),
        names=("scale", "shape"),
        estimates=(scale, shape),
        standard_errors=_se(cov),
        loglik=-float(res.fun),
        n_eff=es.n_u,
        converged=True,
        iterations=int(res.nit),
        threshold=es.threshold,
        covariance=cov,
    )


def fit_exponential(excess_sample, threshold=None) -> FitResult:
    """Exponential fit to excesses; the MLE scale is the mean excess."""
    es = _coerce(excess_sample, threshold)
    y = es.excesses
    if es.n_u < 2:
        raise DegenerateSampleError(f"exponential fit needs at least 2 excesses, got {es.n_u}")
    scale = float(y.mean())
    if not scale > 0:
        raise DegenerateSampleError("mean excess is zero")
    n = es.n_u
    loglik = -n * math.log(scale) - y.sum() / scale
    se = scale / math.sqrt(n)
    return FitResult(
        model="exponential",
        params=GpdParams(scale, 0.0, es.threshold),
        names=("scale",),
        estimates=(scale,),
        standard_errors=(se,),
        loglik=float(loglik),
        n_eff=n,
        converged=True,
        iterations=0,
        threshold=es.threshold,
        covariance=np.array([[se**2]]),
    )


def gev_gpd_link(gev: GevParams, u: float) -> GpdParams:
    """GPD for excesses over ``u`` implied by a PP/GEV parameter set.

    The scale is ``sigma + xi * (u - mu)`` and the shape is unchanged.
    """
    scale = gev.scale + gev.shape * (u - gev.loc)
    if not scale > 0:
        raise DomainError(f"linked GPD scale {scale} is not positive at u={u}")
    return GpdParams(scale, gev.shape, u)


def gpd_gev_link(gpd: GpdParams, n_u: int, n_blocks: float) -> GevParams:
    """PP parameters matching a GPD fit and an exceedance count.

    Inverts :func:`gev_gpd_link` using the PP rate condition
    ``n_blocks * (1 + xi (u - mu)/sigma)^(-1/xi) = n_u``. Because the PP
    likelihood factorizes into a Poisson count term and the GPD term, the
    result is the PP maximum-likelihood estimate whenever ``gpd`` is the
    GPD one.
    """
    rate = n_u / n_blocks
    xi, st, u = gpd.shape, gpd.scale, gpd.threshold
    if abs(xi) < XI_EPS:
        return GevParams(u + st * math.log(rate), st, 0.0)
    sigma = st * rate**xi
    mu = u - (st - sigma) / xi
    return GevParams(mu, sigma, xi)


def fit_pp(
    sample,
    u: float,
    obs_per_block: float = DAYS_PER_YEAR,
    n_blocks: float | None = None,
) -> FitResult:
    """Point-process fit in GEV parameterization.

    Parameters
    ----------
    sample : array_like
        Full sample.
    u : float
        Threshold.
    obs_per_block : float
        Number of observations making up one GEV block. The default treats
        each observation as one day, so a block is a year of records.
    n_blocks : float, optional
        Overrides ``len(sample) / obs_per_block``.

    Notes
    -----
    Starts from the GPD fit mapped through :func:`gpd_gev_link`, then runs
    Nelder-Mead on ``(mu, log sigma, xi)``. BIC uses ``n_eff = n_u``.
    """
    x = np.asarray(sample, dtype=float).ravel()
    es = ExcessSample.from_sample(x, u)
    if es.n_u < 5:
        raise DegenerateSampleError(f"PP fit needs at least 5 exceedances, got {es.n_u}")
    nb = x.size / obs_per_block if n_blocks is None else float(n_blocks)
    if not nb > 0:
        raise DomainError("number of blocks must be positive")
    start_gpd = fit_gpd(es).params
    g0 = gpd_gev_link(start_gpd, es.n_u, nb)
    xu = x[x > u]

    def nll(theta):
        return pp_negloglik((theta[0], math.exp(theta[1]), theta[2]), xu, u, nb)

    res = _nelder_mead(nll, [g0.loc, math.log(g0.scale), g0.shape], "PP fit")
    mu, sigma, xi = float(res.x[0]), math.exp(res.x[1]), float(res.x[2])

    def nll_nat(theta):
        return pp_negloglik(theta, xu, u, nb)

    cov = _covariance(nll_nat, np.array([mu, sigma, xi]))
    return FitResult(
        model="pp",
        params=GevParams(mu, sigma, xi),
        names=("loc", "scale", "shape"),
        estimates=(mu, sigma, xi),
        standard_errors=_se(cov),
        loglik=-float(res.fun),
        n_eff=es.n_u,
        converged=True,
        iterations=int(res.nit),
        threshold=float(u),
        covariance=cov,
    )


def lr_test(full: FitResult, nested: FitResult, df: int = 1, tol: float = 1e-6):
    """Likelihood-ratio test of a nested model.

    Returns
    -------
    (statistic, p_value)
    """
    if df < 1:
        raise DomainError("degrees of freedom must be at least 1")
    stat = 2.0 * (full.loglik - nested.loglik)
    if stat < -tol * max(1.0, abs(full.loglik)):
        raise ConsistencyError(
            f"full model log-likelihood {full.loglik} is below nested {nested.loglik}"
        )
    stat = max(stat, 0.0)
    return stat, float(stats.chi2.sf(stat, df))


def _ks_discrete(counts: np.ndarray, rate: np.ndarray, support_max: int) -> np.ndarray:
    """Sup distance between empirical and Poisson CDFs on 0..support_max.

    ``counts`` has shape (..., m); ``rate`` broadcasts against (...).
    Both CDFs are step functions with jumps at integers, so checking the
    integers is enough.
    """
    k = np.arange(support_max + 1)
    emp = (counts[..., None, :] <= k[:, None]).mean(axis=-1)
    model = stats.poisson.cdf(k, np.asarray(rate)[..., None])
    return np.abs(emp - model).max(axis=-1)


def fit_poisson_frequency(
    annual_counts, years: int | None = None, n_boot: int = 2000, seed: int | None = 0
) -> PoissonRate:
    """Poisson rate of annual event counts with a bootstrap KS check.

    Parameters
    ----------
    annual_counts : sequence of int
        One count per observed year.
    years : int, optional
        Total years observed. Extra years beyond ``len(annual_counts)`` are
        taken to have zero events.
    n_boot : int
        Parametric bootstrap resamples for the goodness-of-fit p-value;
        0 skips the bootstrap.
    seed : int
        Seed for the bootstrap stream.
    """
    c = np.asarray(annual_counts, dtype=float)
    if c.size and (np.any(c < 0) or np.any(c != np.round(c))):
        raise DomainError("annual counts must be nonnegative integers")
    years = c.size if years is None else int(years)
    if years < 1:
        raise DomainError("at least one year is required")
    if years < c.size:
        raise DomainError("years is smaller than the number of counts given")
    c = np.concatenate([c, np.zeros(years - c.size)]).astype(int)
    total = int(c.sum())
    rate = total / years
    if total == 0:
        return PoissonRate(0.0, 1.0, 1.0, 0.0, 0, years, 0)
    top = int(max(c.max(), stats.poisson.ppf(1 - 1e-12, rate))) + 1
    d_obs = float(_ks_discrete(c, rate, top))
    naive = float(stats.kstest(c, lambda k: stats.poisson.cdf(k, rate)).pvalue)
    p_boot = math.nan
    if n_boot > 0:
        if seed is None:
            raise DomainError("a seed is required for the bootstrap")
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        sims = rng.poisson(rate, size=(n_boot, years))
        rates = sims.mean(axis=1)
        top_b = max(top, int(sims.max()) + 1)
        d_boot = _ks_discrete(sims, rates, top_b)
        p_boot = float((1 + np.count_nonzero(d_boot >= d_obs - 1e-12)) / (n_boot + 1))
    return PoissonRate(rate, p_boot, naive, d_obs, total, years, int(n_boot))


# ---------------------------------------------------------------------------
# diagnostics


def mean_residual_life(sample, thresholds) -> list[MrlPoint]:
    """Mean excess over each threshold with a normal-approximation 95% CI.

    Grid points with fewer than two exceedances carry an ``error`` message
    and NaN values instead of aborting the scan.
    """
    x = np.asarray(sample, dtype=float)
    out = []
    for u in np.asarray(thresholds, dtype=float):
        y = x[x > u] - u
        if y.size < 2:
            msg = "no exceedances" if y.size == 0 else "only one exceedance"
            out.append(MrlPoint(float(u), math.nan, math.nan, math.nan, int(y.size), msg))
            continue
        m = float(y.mean())
        half = 1.96 * float(y.std(ddof=1)) / math.sqrt(y.size)
        out.append(MrlPoint(float(u), m, m - half, m + half, int(y.size)))
    return out


def param_stability_scan(sample, thresholds, min_exceedances: int = 10) -> list[StabilityPoint]:
    """GPD shape and modified scale ``scale - shape * u`` across thresholds.

    The modified-scale interval uses the delta method with the fit
    covariance. Points with too few exceedances or a failed fit are flagged.
    """
    x = np.asarray(sample, dtype=float)
    nan2 = (math.nan, math.nan)
    out = []
    for u in np.asarray(thresholds, dtype=float):
        es = ExcessSample.from_sample(x, u)
        if es.n_u < max(min_exceedances, 5):
            out.append(
                StabilityPoint(float(u), es.n_u, math.nan, nan2, math.nan, nan2,
                               f"fewer than {min_exceedances} exceedances")
            )
            continue
        try:
            fit = fit_gpd(es)
        except (ConvergenceError, DegenerateSampleError) as exc:
            out.append(StabilityPoint(float(u), es.n_u, math.nan, nan2, math.nan, nan2, str(exc)))
            continue
        s, xi = fit.estimates
        cov = fit.covariance
        grad = np.array([1.0, -u])
        var_ms = float(grad @ cov @ grad)
        se_xi = math.sqrt(cov[1, 1]) if cov[1, 1] > 0 else math.nan
        se_ms = math.sqrt(var_ms) if var_ms > 0 else math.nan
        ms = s - xi * u
        out.append(
            StabilityPoint(
                float(u), es.n_u, xi, (xi - 1.96 * se_xi, xi + 1.96 * se_xi),
                ms, (ms - 1.96 * se_ms, ms + 1.96 * se_ms),
            )
        )
    return out


def gpd_quantile(p, gpd: GpdParams):
    """Quantile of the excess distribution at probability ``p`` (excess units)."""
    p = np.asarray(p, dtype=float)
    if abs(gpd.shape) < XI_EPS:
        return -gpd.scale * np.log1p(-p)
    return gpd.scale / gpd.shape * np.expm1(-gpd.shape * np.log1p(-p))


def qq_points(excesses, fitted: GpdParams) -> list[tuple[float, float]]:
    """QQ-plot pairs ``(model quantile, empirical quantile)`` in data units.

    The i-th smallest excess is paired with the fitted quantile at
    ``i/(n_u+1)``; both are shifted by the threshold.
    """
    y = np.sort(np.asarray(excesses, dtype=float))
    n = y.size
    p = np.arange(1, n + 1) / (n + 1)
    model = gpd_quantile(p, fitted) + fitted.threshold
    return [(float(m), float(e + fitted.threshold)) for m, e in zip(model, y)]


# ---------------------------------------------------------------------------
# CSV emitters


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "" if math.isnan(v) else repr(v)
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_rows(path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


def write_mrl_csv(path, points: Sequence[MrlPoint]) -> Path:
    return write_rows(
        path,
        ("u", "mean_excess", "lo", "hi", "n_u"),
        ((p.threshold, p.mean_excess, p.lo, p.hi, p.n_u) for p in points),
    )


def write_stability_csv(path, points: Sequence[StabilityPoint]) -> Path:
    return write_rows(
        path,
        ("u", "n_u", "shape", "shape_lo", "shape_hi",
         "modified_scale", "modified_scale_lo", "modified_scale_hi", "flag"),
        (
            (p.threshold, p.n_u, p.shape, *p.shape_ci, p.modified_scale,
             *p.modified_scale_ci, p.flag or "")
            for p in points
        ),
    )


def write_qq_csv(path, pairs) -> Path:
    return write_rows(path, ("model_q", "empirical_q"), pairs)
