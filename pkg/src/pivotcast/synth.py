"""Synthetic datasets with known ground truth.

Generates price-like data straight from the model the pipeline assumes:
standardized smooth features, a linear log-price signal, Student-t noise,
and optionally a piecewise-linear deviation anchored at known pivots plus
a contiguous block of gross outliers. Used by the demo scripts and the
verification harness; everything is deterministic in the seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .correction import PivotPoint, PivotSet
from .ingest import Dataset


@dataclass
class SyntheticTruth:
    """Ground truth behind a generated dataset.

    alpha/beta describe log-price on the *standardized* log-feature scale,
    i.e. exactly the scale the pipeline fits on. When a deviation is
    injected, the augmented-model truth shifts: the intercept absorbs the
    deviation mean and the expert column (standardized deviation) carries
    a coefficient equal to the deviation's sample std.
    """

    alpha: float
    beta: dict[str, float]
    sigma: float
    nu: float
    pivots: PivotSet | None
    deviation: np.ndarray | None
    outlier_mask: np.ndarray | None

    def augmented_truth(self) -> tuple[float, dict[str, float]]:
        if self.deviation is None:
            return self.alpha, dict(self.beta)
        mean = float(self.deviation.mean())
        std = float(self.deviation.std(ddof=1))
        return self.alpha + mean, {**self.beta, "expert": std}


def _smooth_standardized(rng: np.random.Generator, n: int, rho: float = 0.95) -> np.ndarray:
    """AR(1) path re-scaled to exact mean 0 / sample std 1."""
    shocks = rng.standard_normal(n)
    innovation = float(np.sqrt(1.0 - rho * rho))
    path = np.empty(n)
    path[0] = shocks[0]
    for i in range(1, n):
        path[i] = rho * path[i - 1] + innovation * shocks[i]
    path = path - path.mean()
    return path / path.std(ddof=1)


def make_synthetic_dataset(
    seed: int,
    n: int = 500,
    feature_names: tuple[str, ...] = ("trend_a", "trend_b"),
    alpha: float = 7.0,
    beta: tuple[float, ...] = (0.5, -0.3),
    sigma: float = 0.1,
    nu: float = 4.0,
    n_pivots: int = 6,
    deviation_amplitude: float = 0.3,
    outlier_frac: float = 0.0,
    outlier_shift: float = 10.0,
    start: date = date(2017, 1, 1),
) -> tuple[Dataset, SyntheticTruth]:
    """Build a Dataset plus its SyntheticTruth.

    deviation_amplitude 0 disables the injected deviation (and pivots);
    outlier_frac > 0 shifts one contiguous block of log-prices by
    outlier_shift, emulating a corrupted data window.
    """
    if len(beta) != len(feature_names):
        raise ValueError("one beta per feature required")
    rng = np.random.default_rng(seed)
    dates = tuple(start + timedelta(days=i) for i in range(n))

    columns: dict[str, np.ndarray] = {}
    z = np.empty((n, len(feature_names)))
    for j, name in enumerate(feature_names):
        z[:, j] = _smooth_standardized(rng, n)
        level = rng.uniform(2.0, 8.0)
        spread = rng.uniform(0.3, 1.0)
        # raw feature whose log1p z-scores back to exactly z[:, j]
        columns[name] = np.expm1(level + spread * z[:, j])

    log_price = alpha + z @ np.asarray(beta, dtype=float)

    deviation = None
    pivots = None
    if deviation_amplitude > 0 and n_pivots >= 2:
        knots = np.linspace(0, n - 1, n_pivots).round().astype(int)
        signs = (-1.0) ** np.arange(n_pivots) * (1 if rng.uniform() < 0.5 else -1)
        values = deviation_amplitude * signs * rng.uniform(0.75, 1.0, size=n_pivots)
        deviation = np.interp(np.arange(n), knots, values)
        pivots = PivotSet(
            tuple(PivotPoint(dates[i], float(v)) for i, v in zip(knots, values))
        )
        log_price = log_price + deviation

    log_price = log_price + sigma * rng.standard_t(nu, size=n)

    outlier_mask = None
    if outlier_frac > 0:
        n_out = max(1, int(round(outlier_frac * n)))
        start_idx = int(rng.integers(0, n - n_out + 1))
        outlier_mask = np.zeros(n, dtype=bool)
        outlier_mask[start_idx: start_idx + n_out] = True
        log_price = log_price + outlier_shift * outlier_mask

    columns["price"] = np.expm1(log_price)
    dataset = Dataset(dates, columns, "price")
    truth = SyntheticTruth(
        alpha=alpha,
        beta={name: float(b) for name, b in zip(feature_names, beta)},
        sigma=sigma,
        nu=nu,
        pivots=pivots,
        deviation=deviation,
        outlier_mask=outlier_mask,
    )
    return dataset, truth
