from __future__ import annotations

import math
from datetime import date

import numpy as np
import pytest
from scipy import stats

from pivotcast.bayes import (
    McmcConfig,
    PosteriorChains,
    PriorSpec,
    diagnostics,
    export_chains_csv,
    log_density,
    parameter_names_for,
    posterior_predictive,
    sample_posterior,
    summarize,
    value_at_risk,
)
from pivotcast.errors import (
    NumericError,
    SamplerStuckError,
    SchemaError,
    SizeError,
    UsageError,
)

from conftest import make_design, standardized_matrix


def _toy_design(seed=0, n=40, p=2, sigma=0.3, nu=5.0, beta=None, alpha=1.0):
    rng = np.random.default_rng(seed)
    X = standardized_matrix(rng, n, p)
    beta = np.array(beta if beta is not None else [2.0, -1.0][:p])
    y = alpha + X @ beta + sigma * rng.standard_t(nu, size=n)
    return make_design(X, y)


def _point_mass_chains(alpha, beta, sigma, nu, n=200):
    names = parameter_names_for(tuple(f"x{j}" for j in range(len(beta))))
    row = np.array([alpha, *beta, sigma, nu])
    draws = np.tile(row, (2, n, 1))
    return PosteriorChains(names, draws, seed=0)


class TestLogDensity:
    def test_high_nu_approaches_normal(self):
        design = _toy_design(seed=1)
        params = np.array([1.0, 2.0, -1.0, 0.3, 1e6])
        mine = log_density(params, design, PriorSpec())
        # oracle: normal likelihood plus the same priors, computed with scipy
        residual = design.y - 1.0 - design.X @ np.array([2.0, -1.0])
        normal_ll = stats.norm.logpdf(residual, scale=0.3).sum()
        priors = (
            stats.norm.logpdf([1.0, 2.0, -1.0], scale=10.0).sum()
            + stats.halfcauchy.logpdf(0.3, scale=1.0)
            + stats.gamma.logpdf(1e6 - 1, a=2.0, scale=10.0)
        )
        assert mine == pytest.approx(normal_ll + priors, abs=1e-3)

    def test_single_observation_at_mode(self):
        # density term must equal the t log-pdf at zero
        X = np.array([[0.5]])
        beta, alpha, sigma, nu = 2.0, 1.0, 0.7, 4.0
        y = np.array([alpha + 0.5 * beta])
        design = make_design(X, y, names=("f",))
        full = log_density(np.array([alpha, beta, sigma, nu]), design, PriorSpec())
        prior_part = (
            stats.norm.logpdf([alpha, beta], scale=10.0).sum()
            + stats.halfcauchy.logpdf(sigma, scale=1.0)
            + stats.gamma.logpdf(nu - 1, a=2.0, scale=10.0)
        )
        expected_ll = (
            math.lgamma((nu + 1) / 2)
            - math.lgamma(nu / 2)
            - 0.5 * math.log(nu * math.pi)
            - math.log(sigma)
        )
        assert full - prior_part == pytest.approx(expected_ll, abs=1e-10)
        assert full - prior_part == pytest.approx(
            stats.t.logpdf(0.0, df=nu, scale=sigma), abs=1e-10
        )

    def test_negative_sigma_is_minus_inf(self):
        design = _toy_design(seed=2)
        assert log_density(np.array([0, 0, 0, -1.0, 5.0]), design, PriorSpec()) == -math.inf

    def test_nu_at_one_is_minus_inf(self):
        design = _toy_design(seed=2)
        assert log_density(np.array([0, 0, 0, 1.0, 1.0]), design, PriorSpec()) == -math.inf

    def test_invariant_under_observation_permutation(self):
        design = _toy_design(seed=3, n=25)
        rng = np.random.default_rng(0)
        perm = rng.permutation(25)
        shuffled = make_design(design.X[perm], design.y[perm])
        params = np.array([0.8, 1.5, -0.5, 0.4, 6.0])
        assert log_density(params, design, PriorSpec()) == pytest.approx(
            log_density(params, shuffled, PriorSpec()), rel=1e-12
        )

    def test_wrong_parameter_count(self):
        design = _toy_design(seed=4)
        with pytest.raises(SchemaError):
            log_density(np.zeros(3), design, PriorSpec())


class TestSamplePosterior:
    def test_recovers_known_parameters(self):
        design = _toy_design(seed=42, n=200, sigma=0.3, nu=5.0)
        chains = sample_posterior(
            design, PriorSpec(), McmcConfig(n_chains=4, n_warmup=800, n_samples=1500, seed=7)
        )
        truth = {"alpha": 1.0, "beta_x0": 2.0, "beta_x1": -1.0, "sigma": 0.3, "nu": 5.0}
        for i, name in enumerate(chains.parameter_names):
            pooled = chains.pooled(i)
            median = float(np.median(pooled))
            sd = float(pooled.std())
            assert abs(median - truth[name]) < 3 * sd, name
            lo, hi = np.quantile(pooled, [0.05, 0.95])
            assert lo <= truth[name] <= hi, name

    def test_same_seed_bit_identical(self):
        design = _toy_design(seed=5, n=60)
        config = McmcConfig(n_chains=2, n_warmup=200, n_samples=150, seed=11)
        a = sample_posterior(design, PriorSpec(), config)
        b = sample_posterior(design, PriorSpec(), config)
        assert np.array_equal(a.draws, b.draws)

    def test_different_seeds_differ(self):
        design = _toy_design(seed=5, n=60)
        a = sample_posterior(design, PriorSpec(), McmcConfig(2, 200, 150, seed=1))
        b = sample_posterior(design, PriorSpec(), McmcConfig(2, 200, 150, seed=2))
        assert not np.array_equal(a.draws, b.draws)

    def test_support_constraints_hold(self):
        design = _toy_design(seed=6, n=50)
        chains = sample_posterior(
            design, PriorSpec(), McmcConfig(n_chains=2, n_warmup=100, n_samples=150, seed=3)
        )
        assert np.all(chains.draws[:, :, -2] > 0)
        assert np.all(chains.draws[:, :, -1] > 1)

    def test_outlier_robustness_beats_least_squares(self):
        from pivotcast.lasso import LassoConfig, fit_lasso

        rng = np.random.default_rng(8)
        n = 200
        X = standardized_matrix(rng, n, 2)
        beta_true = np.array([2.0, -1.0])
        y = 1.0 + X @ beta_true + 0.3 * rng.standard_normal(n)
        y[rng.choice(n, size=10, replace=False)] += 10.0  # 5% gross outliers
        design = make_design(X, y)
        ls = fit_lasso(design, LassoConfig(lambda_=0.0, tol=1e-12))
        chains = sample_posterior(
            design, PriorSpec(), McmcConfig(n_chains=2, n_warmup=500, n_samples=600, seed=9)
        )
        medians = {s.name: s.median for s in summarize(chains)}
        for j, name in enumerate(("x0", "x1")):
            bayes_err = abs(medians[f"beta_{name}"] - beta_true[j])
            ls_err = abs(ls.coefficients[name] - beta_true[j])
            assert bayes_err < ls_err

    def test_stuck_sampler_raises(self):
        from pivotcast.bayes import _run_chain

        class DivergentRng:
            """Sane start, then every proposal jumps absurdly far: all rejected."""

            def __init__(self):
                self.calls = 0

            def standard_normal(self, size=None):
                if size is not None:
                    return np.zeros(size)
                self.calls += 1
                return 0.0 if self.calls <= 2 else 1e9  # first two: init jitter

            def uniform(self):
                return 0.5

        design = _toy_design(seed=10, n=30)
        with pytest.raises(SamplerStuckError):
            _run_chain(
                design.X,
                design.y,
                PriorSpec(),
                McmcConfig(n_chains=2, n_warmup=50, n_samples=100, seed=0),
                DivergentRng(),
            )


class TestDiagnostics:
    def test_iid_chains_look_converged(self):
        rng = np.random.default_rng(12)
        names = parameter_names_for(())
        sigma_draws = np.abs(rng.standard_normal((4, 1000))) + 0.5
        nu_draws = np.abs(rng.standard_normal((4, 1000))) + 2.0
        alpha_draws = rng.standard_normal((4, 1000))
        draws = np.stack([alpha_draws, sigma_draws, nu_draws], axis=2)
        chains = PosteriorChains(names, draws, seed=0)
        rhat, ess = diagnostics(chains)["alpha"]
        assert 0.99 <= rhat <= 1.01
        assert ess >= 0.5 * 4 * 1000

    def test_disjoint_constant_chains_flagged(self):
        names = parameter_names_for(())
        base = np.zeros((2, 200, 3))
        base[:, :, 1] = 1.0  # sigma
        base[:, :, 2] = 2.0  # nu
        base[1, :, 0] = 1.0  # alpha differs by chain
        chains = PosteriorChains(names, base, seed=0)
        rhat, ess = diagnostics(chains)["alpha"]
        assert rhat > 1.2
        assert ess == 0.0

    def test_identical_constant_chains_degenerate_sentinel(self):
        names = parameter_names_for(())
        draws = np.zeros((2, 200, 3))
        draws[:, :, 1] = 1.0
        draws[:, :, 2] = 2.0
        chains = PosteriorChains(names, draws, seed=0)
        rhat, ess = diagnostics(chains)["alpha"]
        assert not math.isnan(rhat)
        assert math.isinf(rhat)
        assert ess == 0.0

    def test_single_chain_rejected(self):
        names = parameter_names_for(())
        draws = np.zeros((1, 200, 3))
        draws[:, :, 1] = 1.0
        draws[:, :, 2] = 2.0
        with pytest.raises(UsageError):
            diagnostics(PosteriorChains(names, draws, seed=0))


class TestSummarize:
    def _chains_from_values(self, values):
        names = parameter_names_for(())
        n = len(values)
        draws = np.zeros((2, n, 3))
        draws[0, :, 0] = values
        draws[1, :, 0] = values
        draws[:, :, 1] = 1.0
        draws[:, :, 2] = 2.0
        return PosteriorChains(names, draws, seed=0)

    def test_hand_quantiles_one_to_five(self):
        s = summarize(self._chains_from_values([1.0, 2.0, 3.0, 4.0, 5.0]))[0]
        assert (s.median, s.q25, s.q75) == (3.0, 2.0, 4.0)
        assert (s.whisker_low, s.whisker_high) == (1.0, 5.0)

    def test_constant_draws_collapse(self):
        s = summarize(self._chains_from_values([2.5] * 50))[0]
        assert s.median == s.q25 == s.q75 == s.whisker_low == s.whisker_high == 2.5

    def test_symmetric_draws_median_close_to_mean(self):
        rng = np.random.default_rng(13)
        values = rng.standard_normal(4000)
        s = summarize(self._chains_from_values(values))[0]
        assert s.median == pytest.approx(float(values.mean()), abs=0.05)

    def test_whiskers_clip_outliers(self):
        values = [0.0] * 99 + [100.0]
        s = summarize(self._chains_from_values(values))[0]
        assert s.whisker_high == 0.0  # the 100 sits far outside 1.5*IQR


class TestPosteriorPredictive:
    def test_point_mass_tiny_sigma_reproduces_linear_predictor(self):
        chains = _point_mass_chains(1.0, [2.0, -1.0], 1e-12, 10.0)
        draws = posterior_predictive(chains, np.array([0.5, 1.0]), 500, seed=0)
        assert np.allclose(draws, 1.0 + 1.0 - 1.0, atol=1e-6)

    def test_normal_limit_unit_variance(self):
        chains = _point_mass_chains(0.0, [0.0], 1.0, 1e6)
        draws = posterior_predictive(chains, np.array([0.0]), 100_000, seed=1)
        assert 0.98 <= float(draws.std()) <= 1.02

    def test_heavy_tails_have_excess_kurtosis(self):
        chains = _point_mass_chains(0.0, [0.0], 1.0, 3.0)
        heavy = posterior_predictive(chains, np.array([0.0]), 50_000, seed=2)
        normal_ref = np.random.default_rng(3).standard_normal(50_000)

        def kurt(x):
            z = (x - x.mean()) / x.std()
            return float(np.mean(z**4))

        assert kurt(heavy) > kurt(normal_ref) + 1.0

    def test_deterministic_given_seed(self):
        chains = _point_mass_chains(0.0, [1.0], 0.5, 8.0)
        a = posterior_predictive(chains, np.array([0.3]), 1000, seed=5)
        b = posterior_predictive(chains, np.array([0.3]), 1000, seed=5)
        assert np.array_equal(a, b)

    def test_dimension_mismatch(self):
        chains = _point_mass_chains(0.0, [1.0, 2.0], 0.5, 8.0)
        with pytest.raises(SchemaError):
            posterior_predictive(chains, np.array([0.3]), 100, seed=0)


class TestValueAtRisk:
    def test_hand_quantile_linear_interpolation(self):
        draws = np.arange(101, dtype=float)
        est = value_at_risk(draws, 0.05)
        assert est.log_quantile == pytest.approx(5.0)
        assert est.price_quantile == pytest.approx(math.expm1(5.0))

    def test_constant_draws(self):
        est = value_at_risk(np.full(50, 2.0), 0.3)
        assert est.log_quantile == 2.0

    def test_normal_reference_quantile(self):
        draws = np.random.default_rng(14).standard_normal(100_000)
        est = value_at_risk(draws, 0.05)
        assert -1.70 <= est.log_quantile <= -1.60

    def test_monotone_in_level(self):
        draws = np.random.default_rng(15).standard_normal(5000)
        quantiles = [value_at_risk(draws, lv).log_quantile for lv in (0.01, 0.05, 0.1, 0.5)]
        assert quantiles == sorted(quantiles)

    def test_empty_draws_rejected(self):
        with pytest.raises(SizeError):
            value_at_risk(np.array([]), 0.05)

    def test_level_out_of_range(self):
        with pytest.raises(UsageError):
            value_at_risk(np.array([1.0]), 1.5)

    def test_price_invariant(self):
        est = value_at_risk(np.random.default_rng(16).normal(5, 1, 1000), 0.05,
                            horizon_date=date(2018, 1, 1))
        assert est.price_quantile == pytest.approx(math.expm1(est.log_quantile))
        assert est.horizon_date == date(2018, 1, 1)


class TestChainContainers:
    def test_sigma_support_enforced(self):
        names = parameter_names_for(())
        draws = np.zeros((2, 150, 3))
        draws[:, :, 2] = 2.0
        with pytest.raises(NumericError, match="sigma"):
            PosteriorChains(names, draws, seed=0)

    def test_nu_support_enforced(self):
        names = parameter_names_for(())
        draws = np.ones((2, 150, 3))
        with pytest.raises(NumericError, match="nu"):
            PosteriorChains(names, draws, seed=0)

    def test_csv_export_round_trips(self, tmp_path):
        import csv

        chains = _point_mass_chains(0.25, [1.5], 0.5, 4.0, n=3)
        path = tmp_path / "chains.csv"
        export_chains_csv(chains, path)
        with path.open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["chain", "iteration", "alpha", "beta_x0", "sigma", "nu"]
        assert len(rows) == 1 + 2 * 3
        assert float(rows[1][2]) == 0.25

    def test_config_validation(self):
        with pytest.raises(UsageError):
            McmcConfig(n_chains=1)
        with pytest.raises(UsageError):
            McmcConfig(n_samples=50)
        with pytest.raises(UsageError):
            McmcConfig(step_adapt_target=1.5)
