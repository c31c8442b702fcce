#!/usr/bin/env python3
"""Regenerate the committed test fixtures under tests/fixtures/.

Writes a small synthetic daily dataset (per-series CSVs with the standard
feature names), an example pivot file matching its injected deviation, and
chain-statistics fixtures for the offline fetch client. Deterministic, so
reruns are diff-clean.
"""

from __future__ import annotations

import json
from datetime import timedelta
from pathlib import Path

import numpy as np

from pivotcast.correction import interpolate_correction
from pivotcast.evaluate import DEFAULT_FEATURES
from pivotcast.ingest import TimeSeries, write_series
from pivotcast.synth import make_synthetic_dataset

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"
FRONTEND_FIXTURES = ROOT / "frontend" / "tests" / "fixtures"


def main() -> None:
    dataset_dir = FIXTURES / "dataset"
    chainstat_dir = FIXTURES / "chainstats"
    dataset_dir.mkdir(parents=True, exist_ok=True)
    chainstat_dir.mkdir(parents=True, exist_ok=True)

    betas = (0.6, 0.4, 0.3, 0.25, 0.15, 0.35)
    dataset, truth = make_synthetic_dataset(
        seed=2017,
        n=120,
        feature_names=DEFAULT_FEATURES,
        beta=betas,
        n_pivots=5,
    )
    for name, values in dataset.columns.items():
        write_series(TimeSeries(name, dataset.dates, values), dataset_dir / f"{name}.csv")
    truth.pivots.to_json(FIXTURES / "pivots.json")

    rng = np.random.default_rng(99)
    start = dataset.dates[0]
    for metric, base in [
        ("total-bitcoins", 16_500_000.0),
        ("market-price", 950.0),
        ("trade-volume", 80_000_000.0),
        ("difficulty", 3.1e11),
        ("n-unique-addresses", 450_000.0),
    ]:
        days = tuple(start + timedelta(days=i) for i in range(30))
        drift = np.cumsum(rng.normal(0.002, 0.01, size=30))
        write_series(
            TimeSeries(metric, days, base * np.exp(drift)),
            chainstat_dir / f"{metric}.csv",
        )

    # cross-implementation oracle for the browser preview: the correction
    # series this package computes, over a grid wider than the pivot span
    FRONTEND_FIXTURES.mkdir(parents=True, exist_ok=True)
    grid = tuple(dataset.dates[0] + timedelta(days=i - 7) for i in range(140))
    term = interpolate_correction(truth.pivots, grid)
    payload = {
        "pivots": truth.pivots.to_payload(),
        "dates": [d.isoformat() for d in grid],
        "expected": [float(v) for v in term.series.values],
    }
    (FRONTEND_FIXTURES / "correction_fixture.json").write_text(
        json.dumps(payload, indent=2) + "\n"
    )
    print(f"fixtures written under {FIXTURES} and {FRONTEND_FIXTURES}")


if __name__ == "__main__":
    main()
