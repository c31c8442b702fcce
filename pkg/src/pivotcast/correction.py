"""Model-deviation series and the expert correction term.

The deviation is the log-space gap between actual and predicted target;
exponentiating it gives the actual/predicted price ratio (up to the +1
log offset). An expert marks pivot points on that series; straight lines
between consecutive pivots, held constant outside the pivot span, form
the correction term that is standardized and appended to the design as
one extra regressor named "expert".
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .errors import AlignmentError, SizeError, UsageError, ValidationError
from .ingest import TimeSeries
from .preprocess import DesignMatrix, standardize

EXPERT_COLUMN = "expert"


@dataclass(frozen=True)
class PivotPoint:
    """One expert-chosen anchor on the deviation series (log-deviation units)."""

    date: date
    value: float

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValidationError(f"pivot at {self.date}: value must be finite")


@dataclass(frozen=True)
class PivotSet:
    """Ordered pivot points; dates strictly increasing."""

    pivots: tuple[PivotPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "pivots", tuple(self.pivots))
        for a, b in zip(self.pivots, self.pivots[1:]):
            if a.date >= b.date:
                raise ValidationError(
                    f"pivot dates must be strictly increasing: {a.date} then {b.date}"
                )

    def __len__(self) -> int:
        return len(self.pivots)

    def to_payload(self) -> list[dict]:
        return [{"date": p.date.isoformat(), "value": float(p.value)} for p in self.pivots]

    @classmethod
    def from_payload(cls, payload: list[dict]) -> "PivotSet":
        try:
            pivots = tuple(
                PivotPoint(date.fromisoformat(item["date"]), float(item["value"]))
                for item in payload
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed pivot payload: {exc}") from exc
        return cls(pivots)

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_payload(), indent=2) + "\n")

    @classmethod
    def from_json(cls, path: str | Path) -> "PivotSet":
        return cls.from_payload(json.loads(Path(path).read_text()))


@dataclass
class CorrectionTerm:
    """Per-date correction values (log-deviation units) plus their source pivots."""

    series: TimeSeries
    source: PivotSet


def deviation_series(
    actual_log: np.ndarray,
    predicted_log: np.ndarray,
    dates: tuple[date, ...],
) -> TimeSeries:
    """actual - predicted in log space; exp of it is the price-ratio view."""
    actual_log = np.asarray(actual_log, dtype=float)
    predicted_log = np.asarray(predicted_log, dtype=float)
    if len(actual_log) != len(predicted_log) or len(actual_log) != len(dates):
        raise SizeError(
            f"length mismatch: {len(actual_log)} actual, "
            f"{len(predicted_log)} predicted, {len(dates)} dates"
        )
    return TimeSeries("deviation", tuple(dates), actual_log - predicted_log)


def suggest_pivots(deviation: TimeSeries, window: int) -> PivotSet:
    """Candidate pivots: strict local extrema over a (2*window+1)-neighborhood.

    Interior points must beat every neighbor strictly (plateaus yield
    nothing); the first and last points are always included so the expert
    starts from a correction spanning the whole series.
    """
    if window < 1:
        raise UsageError(f"window must be >= 1, got {window}")
    n = len(deviation)
    if n < 2 * window + 1:
        raise SizeError(f"series of length {n} too short for window {window}")
    values = deviation.values
    picked = [0]
    for i in range(window, n - window):
        neighborhood = np.concatenate([values[i - window: i], values[i + 1: i + window + 1]])
        if np.all(values[i] > neighborhood) or np.all(values[i] < neighborhood):
            picked.append(i)
    picked.append(n - 1)
    picked = sorted(set(picked))
    return PivotSet(
        tuple(PivotPoint(deviation.dates[i], float(values[i])) for i in picked)
    )


def interpolate_correction(pivots: PivotSet, dates: tuple[date, ...]) -> CorrectionTerm:
    """Piecewise-linear in time through the pivots, constant outside their span.

    Pivot values are reproduced exactly at pivot dates; no slope is ever
    extrapolated beyond the first or last pivot.
    """
    if len(pivots) == 0:
        raise UsageError("pivot set is empty")
    if not dates:
        raise UsageError("no dates to interpolate on")
    for a, b in zip(dates, dates[1:]):
        if a >= b:
            raise ValidationError(f"query dates must be increasing: {a} then {b}")
    origin = pivots.pivots[0].date
    knot_x = np.array([(p.date - origin).days for p in pivots.pivots], dtype=float)
    knot_y = np.array([p.value for p in pivots.pivots])
    query_x = np.array([(d - origin).days for d in dates], dtype=float)
    # np.interp already clamps to the end values outside [knot_x[0], knot_x[-1]]
    values = np.interp(query_x, knot_x, knot_y)
    return CorrectionTerm(TimeSeries(EXPERT_COLUMN, tuple(dates), values), pivots)


def augment_design(design: DesignMatrix, correction: CorrectionTerm) -> DesignMatrix:
    """Append the standardized correction as one extra column named "expert"."""
    if correction.series.dates != design.dates:
        raise AlignmentError("correction dates do not match design dates")
    if EXPERT_COLUMN in design.feature_names:
        raise ValidationError(f"design already has an {EXPERT_COLUMN!r} column")
    column, params = standardize(correction.series.values, column=EXPERT_COLUMN)
    return DesignMatrix(
        design.dates,
        design.feature_names + (EXPERT_COLUMN,),
        np.column_stack([design.X, column]),
        design.y,
        design.scales + (params,),
    )
