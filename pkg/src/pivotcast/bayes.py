"""Robust Bayesian regression with a Student-t observation model.

The log target variable is modeled as t-distributed around the linear
predictor: heavy tails let gross outliers sit in the tail instead of
dragging the coefficients. Degrees of freedom nu are sampled, not fixed.

    y_i ~ StudentT(nu, alpha + x_i . beta, sigma)

Priors (weakly informative defaults): alpha, beta ~ Normal(0, beta_scale);
sigma ~ HalfCauchy(sigma_scale); nu - 1 ~ Gamma(nu_shape, rate=nu_rate).

Sampling is componentwise adaptive random-walk Metropolis. sigma and nu
move on log scales (log sigma, log(nu - 1)) with the Jacobian folded into
the target; per-coordinate step sizes adapt during warmup toward a target
acceptance rate and are frozen afterwards. Everything is deterministic
given the seed: chain c uses the c-th child of SeedSequence(seed).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .errors import NumericError, SchemaError, SizeError, UsageError, SamplerStuckError
from .preprocess import DesignMatrix

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PriorSpec:
    beta_scale: float = 10.0
    sigma_scale: float = 1.0
    nu_shape: float = 2.0
    nu_rate: float = 0.1

    def __post_init__(self):
        for name in ("beta_scale", "sigma_scale", "nu_shape", "nu_rate"):
            if not getattr(self, name) > 0:
                raise UsageError(f"prior {name} must be > 0")


@dataclass(frozen=True)
class McmcConfig:
    n_chains: int = 4
    n_warmup: int = 1000
    n_samples: int = 1000
    seed: int = 0
    step_adapt_target: float = 0.44

    def __post_init__(self):
        if self.n_chains < 2:
            raise UsageError(f"need at least 2 chains, got {self.n_chains}")
        if self.n_samples < 100:
            raise UsageError(f"need at least 100 samples per chain, got {self.n_samples}")
        if self.n_warmup < 0:
            raise UsageError("n_warmup must be >= 0")
        if not 0.0 < self.step_adapt_target < 1.0:
            raise UsageError("step_adapt_target must be in (0, 1)")


@dataclass
class PosteriorChains:
    """MCMC draws, shape (chains, samples, params).

    Parameter order is (alpha, beta_<feature>..., sigma, nu); every sigma
    draw is > 0 and every nu draw > 1.
    """

    parameter_names: tuple[str, ...]
    draws: np.ndarray
    seed: int

    def __post_init__(self):
        self.parameter_names = tuple(self.parameter_names)
        self.draws = np.asarray(self.draws, dtype=float)
        if self.draws.ndim != 3 or self.draws.shape[2] != len(self.parameter_names):
            raise SizeError(
                f"draws shape {self.draws.shape} does not match "
                f"{len(self.parameter_names)} parameters"
            )
        if self.parameter_names[-2:] != ("sigma", "nu"):
            raise SchemaError("last two parameters must be sigma, nu")
        if np.any(self.draws[:, :, -2] <= 0):
            raise NumericError("posterior contains sigma <= 0")
        if np.any(self.draws[:, :, -1] <= 1):
            raise NumericError("posterior contains nu <= 1")

    @property
    def n_params(self) -> int:
        return len(self.parameter_names)

    def pooled(self, index: int) -> np.ndarray:
        return self.draws[:, :, index].reshape(-1)


@dataclass(frozen=True)
class ParamSummary:
    """Box-plot statistics: quartiles plus Tukey 1.5*IQR whiskers."""

    name: str
    median: float
    q25: float
    q75: float
    whisker_low: float
    whisker_high: float


@dataclass(frozen=True)
class VarEstimate:
    """A low quantile of the predictive price distribution at some horizon."""

    level: float
    horizon_date: date | None
    price_quantile: float
    log_quantile: float


def parameter_names_for(feature_names: tuple[str, ...]) -> tuple[str, ...]:
    return ("alpha", *(f"beta_{name}" for name in feature_names), "sigma", "nu")


def _log_likelihood(residual: np.ndarray, sigma: float, nu: float) -> float:
    """Sum of Student-t log pdfs of the residuals at scale sigma, df nu."""
    n = len(residual)
    const = (
        math.lgamma((nu + 1.0) / 2.0)
        - math.lgamma(nu / 2.0)
        - 0.5 * math.log(nu * math.pi)
        - math.log(sigma)
    )
    tail = np.log1p(residual * residual / (sigma * sigma * nu)).sum()
    return n * const - 0.5 * (nu + 1.0) * float(tail)


def _log_prior(coefs: np.ndarray, sigma: float, nu: float, priors: PriorSpec) -> float:
    s = priors.beta_scale
    lp = -0.5 * float(coefs @ coefs) / (s * s) - len(coefs) * (math.log(s) + 0.5 * _LOG_2PI)
    # half-Cauchy on sigma
    hs = priors.sigma_scale
    lp += math.log(2.0) - math.log(math.pi) - math.log(hs) - math.log1p((sigma / hs) ** 2)
    # shifted gamma on nu: nu - 1 ~ Gamma(shape, rate)
    a, b = priors.nu_shape, priors.nu_rate
    t = nu - 1.0
    lp += a * math.log(b) - math.lgamma(a) + (a - 1.0) * math.log(t) - b * t
    return lp


def log_density(params: np.ndarray, design: DesignMatrix, priors: PriorSpec) -> float:
    """Unnormalized log posterior at (alpha, beta..., sigma, nu).

    Returns -inf (rather than raising) outside the support sigma > 0,
    nu > 1, so samplers can propose freely.
    """
    params = np.asarray(params, dtype=float)
    if len(params) != design.p + 3:
        raise SchemaError(f"expected {design.p + 3} parameters, got {len(params)}")
    if not (np.all(np.isfinite(design.X)) and np.all(np.isfinite(design.y))):
        raise NumericError("design contains non-finite entries")
    alpha = float(params[0])
    beta = params[1: design.p + 1]
    sigma = float(params[-2])
    nu = float(params[-1])
    if not (sigma > 0.0 and nu > 1.0):
        return -math.inf
    residual = design.y - alpha - design.X @ beta
    return _log_likelihood(residual, sigma, nu) + _log_prior(
        params[: design.p + 1], sigma, nu, priors
    )


def sample_posterior(
    design: DesignMatrix, priors: PriorSpec, config: McmcConfig
) -> PosteriorChains:
    """Draw from the posterior with componentwise adaptive random-walk Metropolis."""
    X, y = design.X, design.y
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NumericError("design contains non-finite entries")
    if design.n < 3:
        raise SizeError("need at least 3 observations")
    names = parameter_names_for(design.feature_names)
    children = np.random.SeedSequence(config.seed).spawn(config.n_chains)
    draws = np.empty((config.n_chains, config.n_samples, len(names)))
    for c in range(config.n_chains):
        draws[c] = _run_chain(X, y, priors, config, np.random.default_rng(children[c]))
    return PosteriorChains(names, draws, config.seed)


def _run_chain(
    X: np.ndarray,
    y: np.ndarray,
    priors: PriorSpec,
    config: McmcConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    n, p = X.shape
    cols = np.column_stack([np.ones(n), X])  # intercept first
    k = p + 3

    # Deterministic data-informed start, jittered per chain for overdispersion.
    coefs, *_ = np.linalg.lstsq(cols, y, rcond=None)
    residual = y - cols @ coefs
    sigma0 = max(float(residual.std()), 1e-3)
    se = sigma0 / math.sqrt(n)
    coefs = coefs + rng.standard_normal(p + 1) * 2.0 * se
    log_sigma = math.log(sigma0) + 0.3 * float(rng.standard_normal())
    log_nu1 = math.log(4.0) + 0.5 * float(rng.standard_normal())  # nu around 5
    residual = y - cols @ coefs

    def target(resid: np.ndarray, cf: np.ndarray, lsig: float, lnu1: float) -> float:
        if abs(lsig) > 500.0 or abs(lnu1) > 500.0:
            return -math.inf  # e^500 overflows and has no posterior mass anyway
        sigma = math.exp(lsig)
        nu = 1.0 + math.exp(lnu1)
        # Jacobian of the log transforms keeps the natural-space posterior intact.
        return (
            _log_likelihood(resid, sigma, nu)
            + _log_prior(cf, sigma, nu, priors)
            + lsig
            + lnu1
        )

    lp = target(residual, coefs, log_sigma, log_nu1)
    log_step = np.concatenate([
        np.full(p + 1, math.log(max(2.4 * se, 1e-6))),
        [math.log(0.2), math.log(0.5)],
    ])
    out = np.empty((config.n_samples, k))
    warmup_accepts = 0

    for it in range(config.n_warmup + config.n_samples):
        adapting = it < config.n_warmup
        gamma = (it + 1) ** -0.6 if adapting else 0.0
        for j in range(k):
            z = float(rng.standard_normal())
            delta = math.exp(log_step[j]) * z
            if j < p + 1:
                coefs_prop = coefs.copy()
                coefs_prop[j] += delta
                resid_prop = residual - delta * cols[:, j]
                lp_prop = target(resid_prop, coefs_prop, log_sigma, log_nu1)
            elif j == p + 1:
                lp_prop = target(residual, coefs, log_sigma + delta, log_nu1)
            else:
                lp_prop = target(residual, coefs, log_sigma, log_nu1 + delta)
            log_ratio = lp_prop - lp
            u = float(rng.uniform())
            accept = u > 0.0 and math.log(u) < log_ratio
            if accept:
                lp = lp_prop
                if j < p + 1:
                    coefs, residual = coefs_prop, resid_prop
                elif j == p + 1:
                    log_sigma += delta
                else:
                    log_nu1 += delta
                if adapting:
                    warmup_accepts += 1
            if adapting:
                prob = min(1.0, math.exp(min(log_ratio, 0.0)))
                log_step[j] += gamma * (prob - config.step_adapt_target)

        if not adapting:
            s = it - config.n_warmup
            out[s, 0] = coefs[0]
            out[s, 1: p + 1] = coefs[1:]
            out[s, p + 1] = math.exp(log_sigma)
            out[s, p + 2] = 1.0 + math.exp(log_nu1)

    if config.n_warmup > 0 and warmup_accepts == 0:
        raise SamplerStuckError("every warmup proposal was rejected; check the data scale")
    return out


def diagnostics(chains: PosteriorChains) -> dict[str, tuple[float, float]]:
    """Per-parameter (split-Rhat, effective sample size).

    Rhat is the classic split form (each chain halved, between/within
    variance ratio). ESS combines per-sequence autocorrelations, truncated
    at the first negative Geyer pair sum. Zero-variance chains report the
    inf sentinel for Rhat and an ESS of 0.
    """
    if chains.draws.shape[0] < 2:
        raise UsageError("diagnostics need at least 2 chains")
    out = {}
    for idx, name in enumerate(chains.parameter_names):
        halves = _split_halves(chains.draws[:, :, idx])
        out[name] = (_rhat(halves), _ess(halves))
    return out


def _split_halves(x: np.ndarray) -> np.ndarray:
    m, n = x.shape
    half = n // 2
    if half < 2:
        raise SizeError("need at least 4 draws per chain for split diagnostics")
    return np.concatenate([x[:, :half], x[:, half: 2 * half]], axis=0)


def _rhat(halves: np.ndarray) -> float:
    n = halves.shape[1]
    within = float(halves.var(axis=1, ddof=1).mean())
    between = n * float(halves.mean(axis=1).var(ddof=1))
    if within == 0.0:
        return math.inf
    var_plus = (n - 1) / n * within + between / n
    return math.sqrt(var_plus / within)


def _autocovariance(x: np.ndarray) -> np.ndarray:
    n = len(x)
    centered = x - x.mean()
    size = 1
    while size < 2 * n:
        size *= 2
    spectrum = np.fft.rfft(centered, size)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), size)[:n]
    return acov / n


def _ess(halves: np.ndarray) -> float:
    m, n = halves.shape
    within = float(halves.var(axis=1, ddof=1).mean())
    between = n * float(halves.mean(axis=1).var(ddof=1))
    if within == 0.0:
        return 0.0
    var_plus = (n - 1) / n * within + between / n
    if var_plus == 0.0:
        return 0.0
    mean_acov = np.mean([_autocovariance(halves[c]) for c in range(m)], axis=0)
    rho = 1.0 - (within - mean_acov) / var_plus

    # Geyer initial positive monotone sequence on pair sums.
    tau = 0.0
    prev_pair = math.inf
    for t in range(0, n - 1, 2):
        pair = float(rho[t] + rho[t + 1])
        if pair < 0.0:
            break
        pair = min(pair, prev_pair)
        prev_pair = pair
        tau += 2.0 * pair
    tau = max(tau - 1.0, 1e-12)
    return m * n / tau


def summarize(chains: PosteriorChains) -> list[ParamSummary]:
    """Pooled-chain box-plot summaries (type-7 quantiles, Tukey whiskers)."""
    summaries = []
    for idx, name in enumerate(chains.parameter_names):
        pooled = chains.pooled(idx)
        if pooled.size == 0:
            raise SizeError("no draws to summarize")
        q25, median, q75 = (float(q) for q in np.quantile(pooled, [0.25, 0.5, 0.75]))
        iqr = q75 - q25
        inside = pooled[(pooled >= q25 - 1.5 * iqr) & (pooled <= q75 + 1.5 * iqr)]
        summaries.append(
            ParamSummary(
                name=name,
                median=median,
                q25=q25,
                q75=q75,
                whisker_low=float(inside.min()),
                whisker_high=float(inside.max()),
            )
        )
    return summaries


def posterior_predictive(
    chains: PosteriorChains,
    design_row: np.ndarray,
    n_draws: int,
    seed: int,
) -> np.ndarray:
    """Log-price draws at one design row: alpha + x.beta + sigma * t_nu.

    Parameter vectors are resampled from the pooled chains; both that
    choice and the t draws come from a fresh generator seeded here, so the
    output is deterministic.
    """
    row = np.asarray(design_row, dtype=float)
    p = chains.n_params - 3
    if row.shape != (p,):
        raise SchemaError(f"design row has shape {row.shape}, expected ({p},)")
    if n_draws < 1:
        raise UsageError("n_draws must be >= 1")
    flat = chains.draws.reshape(-1, chains.n_params)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, flat.shape[0], size=n_draws)
    picked = flat[idx]
    location = picked[:, 0] + picked[:, 1: p + 1] @ row
    noise = rng.standard_t(picked[:, -1])
    return location + picked[:, -2] * noise


def value_at_risk(
    predictive_log_draws: np.ndarray,
    level: float,
    horizon_date: date | None = None,
) -> VarEstimate:
    """Empirical level-quantile of the predictive draws, in log and price units."""
    draws = np.asarray(predictive_log_draws, dtype=float)
    if draws.size == 0:
        raise SizeError("no predictive draws")
    if not 0.0 < level < 1.0:
        raise UsageError(f"level must be in (0, 1), got {level}")
    log_quantile = float(np.quantile(draws, level))
    return VarEstimate(
        level=level,
        horizon_date=horizon_date,
        price_quantile=float(np.expm1(log_quantile)),
        log_quantile=log_quantile,
    )


def export_chains_csv(chains: PosteriorChains, path: str | Path) -> None:
    """Write draws as CSV (chain, iteration, one column per parameter)."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["chain", "iteration", *chains.parameter_names])
        n_chains, n_samples, _ = chains.draws.shape
        for c in range(n_chains):
            for i in range(n_samples):
                writer.writerow([c, i, *(repr(float(v)) for v in chains.draws[c, i])])
