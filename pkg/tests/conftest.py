from __future__ import annotations

from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pytest

from pivotcast.ingest import Dataset
from pivotcast.preprocess import DesignMatrix, ScaleParams

FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture
def fixture_dataset_dir() -> Path:
    return FIXTURES / "dataset"


@pytest.fixture
def fixture_pivots_path() -> Path:
    return FIXTURES / "pivots.json"


@pytest.fixture
def chainstat_fixture_dir() -> Path:
    return FIXTURES / "chainstats"


def daterange(n: int, start: date = date(2017, 1, 1)) -> tuple[date, ...]:
    return tuple(start + timedelta(days=i) for i in range(n))


def make_design(X: np.ndarray, y: np.ndarray, names: tuple[str, ...] | None = None) -> DesignMatrix:
    """Wrap raw arrays as a DesignMatrix with pass-through scales."""
    X = np.asarray(X, dtype=float)
    names = names or tuple(f"x{j}" for j in range(X.shape[1]))
    return DesignMatrix(
        daterange(X.shape[0]),
        names,
        X,
        np.asarray(y, dtype=float),
        tuple(ScaleParams(name, 0.0, 1.0) for name in names),
    )


def standardized_matrix(rng: np.random.Generator, n: int, p: int) -> np.ndarray:
    """Random columns z-scored with the n-1 convention."""
    X = rng.standard_normal((n, p))
    return (X - X.mean(axis=0)) / X.std(axis=0, ddof=1)


def make_dataset(columns: dict[str, np.ndarray], target: str = "price") -> Dataset:
    n = len(next(iter(columns.values())))
    return Dataset(daterange(n), columns, target)
