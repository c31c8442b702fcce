"""Loading, fetching, and aligning raw daily feature series.

Canonical interchange format is a two-column CSV ``date,value`` with
ISO-8601 dates, one file per series. Chain statistics can also be pulled
from a remote endpoint or, for offline runs, from a fixture directory of
the same CSVs.
"""

from __future__ import annotations

import csv
import math
import os
import json
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from pathlib import Path

import numpy as np

from .errors import (
    AlignmentError,
    NotFoundError,
    ParseError,
    TransportError,
    UsageError,
    ValidationError,
)

CHAIN_METRICS = (
    "total-bitcoins",
    "market-price",
    "trade-volume",
    "difficulty",
    "n-unique-addresses",
)


@dataclass(frozen=True)
class TimeSeries:
    """Daily-stamped real-valued series; dates strictly increasing, values finite."""

    name: str
    dates: tuple[date, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != len(values):
            raise ValidationError(
                f"series {self.name!r}: {len(self.dates)} dates vs {len(values)} values"
            )
        for a, b in zip(self.dates, self.dates[1:]):
            if a == b:
                raise ValidationError(f"series {self.name!r}: duplicate date {a}")
            if a > b:
                raise ValidationError(f"series {self.name!r}: dates not increasing at {b}")
        if values.size and not np.all(np.isfinite(values)):
            bad = self.dates[int(np.flatnonzero(~np.isfinite(values))[0])]
            raise ValidationError(f"series {self.name!r}: non-finite value at {bad}")

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def points(self) -> list[tuple[date, float]]:
        return list(zip(self.dates, self.values.tolist()))


@dataclass
class Dataset:
    """Aligned named columns on a shared date grid."""

    dates: tuple[date, ...]
    columns: dict[str, np.ndarray]
    target_name: str

    def __post_init__(self):
        self.dates = tuple(self.dates)
        n = len(self.dates)
        self.columns = {k: np.asarray(v, dtype=float) for k, v in self.columns.items()}
        for name, col in self.columns.items():
            if len(col) != n:
                raise ValidationError(f"column {name!r} has {len(col)} values for {n} dates")
        if self.target_name not in self.columns:
            raise ValidationError(f"target {self.target_name!r} missing from columns")

    def series(self, name: str) -> TimeSeries:
        if name not in self.columns:
            raise NotFoundError(f"column {name!r} not in dataset")
        return TimeSeries(name, self.dates, self.columns[name])


def load_series(path: str | Path, name: str) -> TimeSeries:
    """Read a ``date,value`` CSV into a TimeSeries, sorting rows by date.

    Raises ParseError with the line number for malformed rows, and
    ValidationError for duplicate dates or non-finite values.
    """
    path = Path(path)
    if not path.exists():
        raise NotFoundError(f"series file not found: {path}")
    rows: list[tuple[date, float]] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if lineno == 1 and row[0].strip().lower() == "date":
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 columns, got {len(row)}", line=lineno)
            try:
                day = date.fromisoformat(row[0].strip())
            except ValueError:
                raise ParseError(f"bad date {row[0]!r}", line=lineno) from None
            try:
                value = float(row[1])
            except ValueError:
                raise ParseError(f"bad value {row[1]!r}", line=lineno) from None
            if not math.isfinite(value):
                raise ValidationError(f"{path}: non-finite value at {day}")
            rows.append((day, value))
    rows.sort(key=lambda p: p[0])
    return TimeSeries(name, tuple(d for d, _ in rows), np.array([v for _, v in rows]))


def write_series(series: TimeSeries, path: str | Path) -> None:
    """Write a TimeSeries as the canonical ``date,value`` CSV (load round-trips)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "value"])
        for day, value in zip(series.dates, series.values):
            writer.writerow([day.isoformat(), repr(float(value))])


@dataclass
class StatClientConfig:
    """Where chain statistics come from: a live endpoint or a fixture directory.

    Environment variables PIVOTCAST_STAT_URL, PIVOTCAST_STAT_TIMEOUT and
    PIVOTCAST_STAT_FIXTURES override whatever a config file supplied.
    """

    base_url: str | None = None
    timeout: float = 10.0
    fixture_dir: Path | None = None

    @classmethod
    def from_file(cls, path: str | Path) -> "StatClientConfig":
        with Path(path).open() as fh:
            raw = json.load(fh)
        cfg = cls(
            base_url=raw.get("base_url"),
            timeout=float(raw.get("timeout", 10.0)),
            fixture_dir=Path(raw["fixture_dir"]) if raw.get("fixture_dir") else None,
        )
        return cfg.with_env_overrides()

    def with_env_overrides(self) -> "StatClientConfig":
        url = os.environ.get("PIVOTCAST_STAT_URL")
        timeout = os.environ.get("PIVOTCAST_STAT_TIMEOUT")
        fixtures = os.environ.get("PIVOTCAST_STAT_FIXTURES")
        return StatClientConfig(
            base_url=url if url else self.base_url,
            timeout=float(timeout) if timeout else self.timeout,
            fixture_dir=Path(fixtures) if fixtures else self.fixture_dir,
        )


def fetch_chain_stat(
    metric: str,
    start: date,
    end: date,
    client: StatClientConfig,
) -> TimeSeries:
    """Fetch one daily chain statistic, from fixtures when configured.

    Fixture mode reads ``<fixture_dir>/<metric>.csv`` verbatim; live mode
    GETs ``<base_url>/charts/<metric>`` expecting ``{"values": [{"x": unix_ts,
    "y": value}, ...]}``. Either way the result is clipped to [start, end].
    """
    if metric not in CHAIN_METRICS:
        raise UsageError(f"unknown metric {metric!r}; choose from {', '.join(CHAIN_METRICS)}")
    if client.fixture_dir is not None:
        fixture = Path(client.fixture_dir) / f"{metric}.csv"
        if not fixture.exists():
            raise NotFoundError(f"fixture missing for metric {metric!r}: {fixture}")
        series = load_series(fixture, metric)
        return _clip(series, start, end)
    if not client.base_url:
        raise UsageError("StatClientConfig needs either base_url or fixture_dir")

    import httpx

    url = f"{client.base_url.rstrip('/')}/charts/{metric}"
    try:
        response = httpx.get(
            url,
            params={"format": "json", "start": start.isoformat(), "end": end.isoformat()},
            timeout=client.timeout,
        )
    except httpx.HTTPError as exc:
        raise TransportError(f"fetch of {metric!r} failed: {exc}") from exc
    if response.status_code != 200:
        raise TransportError(
            f"fetch of {metric!r} returned HTTP {response.status_code}",
            status=response.status_code,
        )
    try:
        payload = response.json()
        points = [
            (date.fromtimestamp(int(item["x"])), float(item["y"]))
            for item in payload["values"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise TransportError(f"malformed payload for {metric!r}: {exc}") from exc
    points.sort(key=lambda p: p[0])
    series = TimeSeries(metric, tuple(d for d, _ in points), np.array([v for _, v in points]))
    return _clip(series, start, end)


def _clip(series: TimeSeries, start: date, end: date) -> TimeSeries:
    keep = [i for i, d in enumerate(series.dates) if start <= d <= end]
    return TimeSeries(
        series.name,
        tuple(series.dates[i] for i in keep),
        series.values[keep] if keep else np.array([]),
    )


@dataclass(frozen=True)
class AlignPolicy:
    """How to reconcile series with differing date coverage.

    mode "intersect" keeps only shared dates; "forward_fill" takes the date
    union and fills gaps with the last seen value, but never across more
    than max_gap_days (silent long fills would fabricate data).
    """

    mode: str = "intersect"
    max_gap_days: int = 3

    def __post_init__(self):
        if self.mode not in ("intersect", "forward_fill"):
            raise UsageError(f"unknown align mode {self.mode!r}")


def align(series: list[TimeSeries], policy: AlignPolicy, target_name: str | None = None) -> Dataset:
    """Place all series on one date grid according to policy.

    target_name defaults to the first series' name. Raises AlignmentError
    when the intersection is empty or a gap exceeds the fill cap.
    """
    if not series:
        raise UsageError("align needs at least one series")
    names = [s.name for s in series]
    if len(set(names)) != len(names):
        raise ValidationError(f"duplicate series names: {names}")

    if policy.mode == "intersect":
        common = set(series[0].dates)
        for s in series[1:]:
            common &= set(s.dates)
        if not common:
            raise AlignmentError("date intersection of series is empty")
        grid = tuple(sorted(common))
        columns = {}
        for s in series:
            index = {d: i for i, d in enumerate(s.dates)}
            columns[s.name] = s.values[[index[d] for d in grid]]
    else:
        union: set[date] = set()
        for s in series:
            union |= set(s.dates)
        if not union:
            raise AlignmentError("all series are empty")
        grid = tuple(sorted(union))
        columns = {}
        for s in series:
            index = {d: i for i, d in enumerate(s.dates)}
            filled = np.empty(len(grid))
            last_seen: date | None = None
            for i, day in enumerate(grid):
                if day in index:
                    filled[i] = s.values[index[day]]
                    last_seen = day
                else:
                    if last_seen is None:
                        raise AlignmentError(
                            f"series {s.name!r} has no value on or before {day}"
                        )
                    gap = (day - last_seen).days
                    if gap > policy.max_gap_days:
                        raise AlignmentError(
                            f"series {s.name!r}: gap of {gap} days at {day} "
                            f"exceeds max_gap_days={policy.max_gap_days}"
                        )
                    filled[i] = s.values[index[last_seen]]
            columns[s.name] = filled

    return Dataset(grid, columns, target_name or names[0])


def load_dataset_dir(
    data_dir: str | Path,
    feature_names: list[str],
    target_name: str,
    policy: AlignPolicy | None = None,
) -> Dataset:
    """Load ``<name>.csv`` per feature plus the target from a directory and align."""
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise NotFoundError(f"data directory not found: {data_dir}")
    wanted = list(dict.fromkeys([target_name, *feature_names]))
    series = [load_series(data_dir / f"{name}.csv", name) for name in wanted]
    return align(series, policy or AlignPolicy(), target_name=target_name)
