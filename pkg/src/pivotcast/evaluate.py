"""Experiment orchestration: split, fit, correct, sample, and report.

RMSE is reported in price units (errors are taken after expm1 back to
price space) because that is the scale the numbers are read on, while the
model itself lives in log space. In split mode nothing downstream of the
boundary touches scale fitting, lambda selection, or pivot placement, so
out-of-sample numbers are leak-free.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .bayes import (
    McmcConfig,
    ParamSummary,
    PosteriorChains,
    PriorSpec,
    VarEstimate,
    posterior_predictive,
    sample_posterior,
    summarize,
    value_at_risk,
)
from .correction import (
    CorrectionTerm,
    PivotSet,
    augment_design,
    deviation_series,
    interpolate_correction,
)
from .errors import SizeError, SplitError, ValidationError
from .ingest import Dataset, TimeSeries
from .lasso import LassoConfig, LassoFit, fit_lasso, predict, select_lambda
from .preprocess import DesignMatrix, apply_scales, build_design

DEFAULT_FEATURES = (
    "gtrend",
    "wiki_cryptocurrency",
    "difficulty",
    "n_unique_addresses",
    "total_bitcoins",
    "volume",
)


def rmse_price(predicted_log: np.ndarray, actual_log: np.ndarray) -> float:
    """Root mean squared error in price units: both sides pass through expm1."""
    predicted_log = np.asarray(predicted_log, dtype=float)
    actual_log = np.asarray(actual_log, dtype=float)
    if predicted_log.shape != actual_log.shape:
        raise SizeError(
            f"length mismatch: {predicted_log.shape} predicted vs {actual_log.shape} actual"
        )
    if predicted_log.size == 0:
        raise SizeError("rmse of empty vectors")
    diff = np.expm1(predicted_log) - np.expm1(actual_log)
    return float(np.sqrt(np.mean(diff * diff)))


def time_split(dataset: Dataset, boundary: date) -> tuple[Dataset, Dataset]:
    """Train strictly before the boundary, test from the boundary on. No shuffling."""
    n_train = sum(1 for d in dataset.dates if d < boundary)
    if n_train == 0 or n_train == len(dataset.dates):
        raise SplitError(
            f"boundary {boundary} leaves an empty side "
            f"(dates span {dataset.dates[0]}..{dataset.dates[-1]})"
        )
    train = Dataset(
        dataset.dates[:n_train],
        {k: v[:n_train] for k, v in dataset.columns.items()},
        dataset.target_name,
    )
    test = Dataset(
        dataset.dates[n_train:],
        {k: v[n_train:] for k, v in dataset.columns.items()},
        dataset.target_name,
    )
    return train, test


@dataclass(frozen=True)
class ExperimentOptions:
    """Everything run_experiment needs; all randomness flows from `seed`."""

    features: tuple[str, ...] = DEFAULT_FEATURES
    lambda_: float = 0.01
    lambda_grid: tuple[float, ...] | None = None  # overrides lambda_ when set
    n_folds: int = 5
    split: date | None = None
    seed: int = 0
    run_bayes: bool = True
    n_chains: int = 4
    n_samples: int = 1000
    n_warmup: int = 1000
    priors: PriorSpec = field(default_factory=PriorSpec)
    var_level: float = 0.05
    var_draws: int = 10_000


@dataclass
class ExperimentReport:
    """The with/without-correction comparison, price-space RMSE and posterior sigma."""

    mode: str  # "in-sample" or "out-of-sample"
    split: date | None
    lambda_: float
    seed: int
    partial: bool  # True when the Bayesian stage was skipped
    rmse_base: float
    coefficients_base: dict[str, float]
    rmse_corrected: float | None = None
    coefficients_corrected: dict[str, float] | None = None
    sigma_base_median: float | None = None
    sigma_corrected_median: float | None = None
    var: VarEstimate | None = None

    def to_dict(self) -> dict:
        """JSON-ready dict; absent branches are omitted, not null."""
        out: dict = {
            "mode": self.mode,
            "lambda": self.lambda_,
            "seed": self.seed,
            "partial": self.partial,
            "rmse_base": self.rmse_base,
            "coefficients_base": self.coefficients_base,
        }
        if self.split is not None:
            out["split"] = self.split.isoformat()
        if self.rmse_corrected is not None:
            out["rmse_corrected"] = self.rmse_corrected
            out["coefficients_corrected"] = self.coefficients_corrected
        if self.sigma_base_median is not None:
            out["sigma_base_median"] = self.sigma_base_median
        if self.sigma_corrected_median is not None:
            out["sigma_corrected_median"] = self.sigma_corrected_median
        if self.var is not None:
            out["var"] = {
                "level": self.var.level,
                "horizon_date": (
                    self.var.horizon_date.isoformat() if self.var.horizon_date else None
                ),
                "log_quantile": self.var.log_quantile,
                "price_quantile": self.var.price_quantile,
            }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


@dataclass
class ExperimentResult:
    """Report plus the intermediate artifacts the service re-serves."""

    report: ExperimentReport
    train_design: DesignMatrix
    eval_design: DesignMatrix
    base_fit: LassoFit
    deviation: TimeSeries
    eval_dates: tuple[date, ...]
    predicted_base: np.ndarray
    actual_log: np.ndarray
    correction: CorrectionTerm | None = None
    corrected_fit: LassoFit | None = None
    predicted_corrected: np.ndarray | None = None
    chains_base: PosteriorChains | None = None
    chains_corrected: PosteriorChains | None = None
    summaries_base: list[ParamSummary] | None = None
    summaries_corrected: list[ParamSummary] | None = None


def _coefficient_table(fit: LassoFit) -> dict[str, float]:
    return {"intercept": fit.intercept, **fit.coefficients}


def run_experiment(
    dataset: Dataset,
    pivots: PivotSet | None,
    options: ExperimentOptions,
) -> ExperimentResult:
    """Fit the base model, optionally the expert-corrected one, then sample.

    With a split boundary, scales/lambda/fits come from the training window
    only and RMSE is evaluated out-of-sample; otherwise everything is
    in-sample, matching the full-sample demonstration mode.
    """
    if pivots is not None and len(pivots) == 0:
        pivots = None

    if options.split is not None:
        train_ds, eval_ds = time_split(dataset, options.split)
        if pivots is not None:
            late = [p for p in pivots.pivots if p.date >= options.split]
            if late:
                raise ValidationError(
                    f"pivot at {late[0].date} is not before the split boundary "
                    f"{options.split}; out-of-sample mode forbids look-ahead pivots"
                )
        mode = "out-of-sample"
    else:
        train_ds, eval_ds = dataset, None
        mode = "in-sample"

    features = list(options.features)
    train_design = build_design(train_ds, features)
    if options.lambda_grid is not None:
        lam = select_lambda(train_design, list(options.lambda_grid), options.n_folds)
    else:
        lam = options.lambda_
    config = LassoConfig(lambda_=lam)

    base_fit = fit_lasso(train_design, config)
    eval_design = (
        apply_scales(eval_ds, features, train_design.scales) if eval_ds else train_design
    )
    predicted_base = predict(base_fit, eval_design)
    deviation = deviation_series(
        train_design.y, predict(base_fit, train_design), train_design.dates
    )

    correction = corrected_fit = predicted_corrected = None
    rmse_corrected = None
    aug_train = aug_eval = None
    if pivots is not None:
        correction = interpolate_correction(pivots, train_design.dates)
        aug_train = augment_design(train_design, correction)
        corrected_fit = fit_lasso(aug_train, config)
        if eval_ds is not None:
            eval_correction = interpolate_correction(pivots, eval_design.dates)
            expert_scale = aug_train.scales[-1]
            aug_eval = DesignMatrix(
                eval_design.dates,
                aug_train.feature_names,
                np.column_stack(
                    [eval_design.X, expert_scale.apply(eval_correction.series.values)]
                ),
                eval_design.y,
                aug_train.scales,
            )
        else:
            aug_eval = aug_train
        predicted_corrected = predict(corrected_fit, aug_eval)
        rmse_corrected = rmse_price(predicted_corrected, aug_eval.y)

    chains_base = chains_corrected = None
    summaries_base = summaries_corrected = None
    sigma_base = sigma_corrected = None
    var_estimate = None
    if options.run_bayes:
        stage_seeds = [int(s) for s in np.random.SeedSequence(options.seed).generate_state(3)]
        mcmc = dict(
            n_chains=options.n_chains,
            n_warmup=options.n_warmup,
            n_samples=options.n_samples,
        )
        chains_base = sample_posterior(
            train_design, options.priors, McmcConfig(seed=stage_seeds[0], **mcmc)
        )
        summaries_base = summarize(chains_base)
        sigma_base = _median_of(summaries_base, "sigma")
        if pivots is not None:
            chains_corrected = sample_posterior(
                aug_train, options.priors, McmcConfig(seed=stage_seeds[1], **mcmc)
            )
            summaries_corrected = summarize(chains_corrected)
            sigma_corrected = _median_of(summaries_corrected, "sigma")
        var_chains = chains_corrected if chains_corrected is not None else chains_base
        var_design = aug_eval if pivots is not None else eval_design
        predictive = posterior_predictive(
            var_chains, var_design.X[-1], options.var_draws, seed=stage_seeds[2]
        )
        var_estimate = value_at_risk(
            predictive, options.var_level, horizon_date=var_design.dates[-1]
        )

    report = ExperimentReport(
        mode=mode,
        split=options.split,
        lambda_=lam,
        seed=options.seed,
        partial=not options.run_bayes,
        rmse_base=rmse_price(predicted_base, eval_design.y),
        coefficients_base=_coefficient_table(base_fit),
        rmse_corrected=rmse_corrected,
        coefficients_corrected=(
            _coefficient_table(corrected_fit) if corrected_fit is not None else None
        ),
        sigma_base_median=sigma_base,
        sigma_corrected_median=sigma_corrected,
        var=var_estimate,
    )
    return ExperimentResult(
        report=report,
        train_design=train_design,
        eval_design=eval_design,
        base_fit=base_fit,
        deviation=deviation,
        eval_dates=eval_design.dates,
        predicted_base=predicted_base,
        actual_log=eval_design.y,
        correction=correction,
        corrected_fit=corrected_fit,
        predicted_corrected=predicted_corrected,
        chains_base=chains_base,
        chains_corrected=chains_corrected,
        summaries_base=summaries_base,
        summaries_corrected=summaries_corrected,
    )


def _median_of(summaries: list[ParamSummary], name: str) -> float:
    for s in summaries:
        if s.name == name:
            return s.median
    raise KeyError(name)


def export_predictions_csv(result: ExperimentResult, path: str | Path) -> None:
    """Per-date actual/predicted(/corrected) prices for external plotting."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "actual_price", "predicted_price", "corrected_price"])
        corrected = result.predicted_corrected
        for i, day in enumerate(result.eval_dates):
            row = [
                day.isoformat(),
                repr(float(np.expm1(result.actual_log[i]))),
                repr(float(np.expm1(result.predicted_base[i]))),
            ]
            row.append(repr(float(np.expm1(corrected[i]))) if corrected is not None else "")
            writer.writerow(row)
