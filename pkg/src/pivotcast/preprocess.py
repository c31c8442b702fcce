"""Log transform, standardization, and design-matrix assembly.

Every regressor is mapped through ln(x + 1) and then z-scored with the
n-1 (sample) standard deviation. The target gets the log transform only,
never the z-score, so predictions back-transform to price units with a
plain expm1.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import DegenerateColumnError, DomainError, NotFoundError, SizeError
from .ingest import Dataset, TimeSeries


@dataclass(frozen=True)
class ScaleParams:
    """Mean/std (log-space units) used to z-score one column; std > 0."""

    column: str
    mean: float
    std: float

    def __post_init__(self):
        if not self.std > 0:
            raise DegenerateColumnError(f"column {self.column!r}: std must be > 0")

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.mean) / self.std

    def invert(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=float) * self.std + self.mean


@dataclass
class DesignMatrix:
    """Standardized log-space regressors X plus the log-space target y.

    Rows follow `dates`; columns follow `feature_names`; `scales` holds one
    ScaleParams per feature. Only shapes are validated here -- the mean-0 /
    std-1 property is guaranteed by build_design for the data the scales
    were fit on, and intentionally does not hold for out-of-window rows
    scored with training scales.
    """

    dates: tuple[date, ...]
    feature_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    scales: tuple[ScaleParams, ...]

    def __post_init__(self):
        self.dates = tuple(self.dates)
        self.feature_names = tuple(self.feature_names)
        self.scales = tuple(self.scales)
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        n, p = self.X.shape
        if n != len(self.dates):
            raise SizeError(f"X has {n} rows for {len(self.dates)} dates")
        if len(self.y) != n:
            raise SizeError(f"y has {len(self.y)} entries for {n} rows")
        if p != len(self.feature_names):
            raise SizeError(f"X has {p} columns for {len(self.feature_names)} names")
        if len(self.scales) != p:
            raise SizeError(f"{len(self.scales)} scale params for {p} columns")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def log1p_transform(series: TimeSeries, allow_negative: bool = False) -> TimeSeries:
    """Map every value through ln(value + 1), keeping dates.

    Values below 0 (or below -1 when negatives are allowed) raise a
    DomainError naming the offending date.
    """
    values = series.values
    bad = np.flatnonzero(values <= -1.0) if allow_negative else np.flatnonzero(values < 0.0)
    if bad.size:
        i = int(bad[0])
        raise DomainError(
            f"series {series.name!r}: value {values[i]} at {series.dates[i]} "
            f"outside log1p domain"
        )
    return TimeSeries(series.name, series.dates, np.log1p(values))


def standardize(values: np.ndarray, column: str = "") -> tuple[np.ndarray, ScaleParams]:
    """Z-score a vector with the sample (n-1) standard deviation.

    Returns the scaled vector and the ScaleParams needed to invert it.
    Constant vectors and vectors shorter than 2 are rejected.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise SizeError("standardize expects a 1-d vector")
    if len(values) < 2:
        raise SizeError(f"column {column!r}: need at least 2 values, got {len(values)}")
    mean = float(values.mean())
    std = float(values.std(ddof=1))
    if std == 0.0:
        raise DegenerateColumnError(f"column {column!r} is constant (std = 0)")
    params = ScaleParams(column=column, mean=mean, std=std)
    return (values - mean) / std, params


def build_design(dataset: Dataset, feature_order: list[str]) -> DesignMatrix:
    """Assemble the design matrix: log1p + z-score per feature, log1p target."""
    for name in [*feature_order, dataset.target_name]:
        if name not in dataset.columns:
            raise NotFoundError(f"column {name!r} not in dataset")
    n = len(dataset.dates)
    X = np.empty((n, len(feature_order)))
    scales = []
    for j, name in enumerate(feature_order):
        logged = log1p_transform(dataset.series(name))
        X[:, j], params = standardize(logged.values, column=name)
        scales.append(params)
    y = log1p_transform(dataset.series(dataset.target_name)).values
    return DesignMatrix(dataset.dates, tuple(feature_order), X, y, tuple(scales))


def apply_scales(
    dataset: Dataset,
    feature_order: list[str],
    scales: tuple[ScaleParams, ...],
) -> DesignMatrix:
    """Score a (typically out-of-window) dataset with previously fit scales.

    Same log1p pipeline as build_design, but the z-scores reuse the given
    mean/std instead of refitting, so no information flows from these rows.
    """
    if tuple(s.column for s in scales) != tuple(feature_order):
        raise NotFoundError(
            f"scale params {[s.column for s in scales]} do not match features {feature_order}"
        )
    for name in [*feature_order, dataset.target_name]:
        if name not in dataset.columns:
            raise NotFoundError(f"column {name!r} not in dataset")
    n = len(dataset.dates)
    X = np.empty((n, len(feature_order)))
    for j, (name, params) in enumerate(zip(feature_order, scales)):
        logged = log1p_transform(dataset.series(name))
        X[:, j] = params.apply(logged.values)
    y = log1p_transform(dataset.series(dataset.target_name)).values
    return DesignMatrix(dataset.dates, tuple(feature_order), X, y, tuple(scales))
