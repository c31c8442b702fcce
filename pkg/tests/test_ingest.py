from __future__ import annotations

from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pivotcast.errors import (
    AlignmentError,
    NotFoundError,
    ParseError,
    TransportError,
    UsageError,
    ValidationError,
)
from pivotcast.ingest import (
    AlignPolicy,
    StatClientConfig,
    TimeSeries,
    align,
    fetch_chain_stat,
    load_series,
    write_series,
)

from conftest import daterange


def _write(path, text):
    path.write_text(text)
    return path


class TestTimeSeries:
    def test_duplicate_dates_rejected(self):
        d = date(2017, 1, 1)
        with pytest.raises(ValidationError, match="duplicate"):
            TimeSeries("x", (d, d), np.array([1.0, 2.0]))

    def test_decreasing_dates_rejected(self):
        with pytest.raises(ValidationError, match="not increasing"):
            TimeSeries("x", (date(2017, 1, 2), date(2017, 1, 1)), np.array([1.0, 2.0]))

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError, match="non-finite"):
            TimeSeries("x", daterange(2), np.array([1.0, np.nan]))


class TestLoadSeries:
    def test_two_rows_echo(self, tmp_path):
        p = _write(tmp_path / "s.csv", "date,value\n2017-01-01,1.0\n2017-01-02,2.0\n")
        s = load_series(p, "s")
        assert s.points == [(date(2017, 1, 1), 1.0), (date(2017, 1, 2), 2.0)]

    def test_empty_file_gives_empty_series(self, tmp_path):
        p = _write(tmp_path / "s.csv", "")
        s = load_series(p, "s")
        assert len(s) == 0

    def test_out_of_order_rows_sorted(self, tmp_path):
        # oracle: whatever order rows arrive in, output equals the sorted rows
        rows = [("2017-01-02", 2.0), ("2017-01-01", 1.0), ("2017-01-03", 3.0)]
        p = _write(
            tmp_path / "s.csv",
            "date,value\n" + "".join(f"{d},{v}\n" for d, v in rows),
        )
        s = load_series(p, "s")
        expected = sorted((date.fromisoformat(d), v) for d, v in rows)
        assert s.points == expected

    def test_malformed_row_names_line(self, tmp_path):
        p = _write(tmp_path / "s.csv", "date,value\n2017-01-01,1.0\nnot-a-date,2.0\n")
        with pytest.raises(ParseError, match="line 3"):
            load_series(p, "s")

    def test_wrong_column_count_names_line(self, tmp_path):
        p = _write(tmp_path / "s.csv", "2017-01-01,1.0,extra\n")
        with pytest.raises(ParseError, match="line 1"):
            load_series(p, "s")

    def test_duplicate_date_rejected(self, tmp_path):
        p = _write(tmp_path / "s.csv", "2017-01-01,1.0\n2017-01-01,2.0\n")
        with pytest.raises(ValidationError, match="duplicate"):
            load_series(p, "s")

    def test_non_finite_value_rejected(self, tmp_path):
        p = _write(tmp_path / "s.csv", "2017-01-01,nan\n")
        with pytest.raises(ValidationError, match="non-finite"):
            load_series(p, "s")

    def test_missing_file(self, tmp_path):
        with pytest.raises(NotFoundError):
            load_series(tmp_path / "absent.csv", "s")

    @given(
        st.lists(
            st.floats(min_value=-1e12, max_value=1e12, allow_nan=False),
            min_size=0,
            max_size=40,
        )
    )
    @settings(max_examples=40, deadline=None)
    def test_write_load_round_trip(self, values):
        import tempfile
        from pathlib import Path

        series = TimeSeries("rt", daterange(len(values)), np.array(values))
        with tempfile.TemporaryDirectory() as td:
            path = Path(td) / "rt.csv"
            write_series(series, path)
            back = load_series(path, "rt")
        assert back.dates == series.dates
        assert np.array_equal(back.values, series.values)


class TestFetchChainStat:
    def test_fixture_passthrough(self, chainstat_fixture_dir):
        cfg = StatClientConfig(fixture_dir=chainstat_fixture_dir)
        got = fetch_chain_stat("difficulty", date(2017, 1, 1), date(2017, 12, 31), cfg)
        direct = load_series(chainstat_fixture_dir / "difficulty.csv", "difficulty")
        assert got.dates == direct.dates
        assert np.array_equal(got.values, direct.values)

    def test_fixture_deterministic_across_calls(self, chainstat_fixture_dir):
        cfg = StatClientConfig(fixture_dir=chainstat_fixture_dir)
        a = fetch_chain_stat("market-price", date(2017, 1, 1), date(2018, 1, 1), cfg)
        b = fetch_chain_stat("market-price", date(2017, 1, 1), date(2018, 1, 1), cfg)
        assert a.dates == b.dates and np.array_equal(a.values, b.values)

    def test_range_clipping(self, chainstat_fixture_dir):
        cfg = StatClientConfig(fixture_dir=chainstat_fixture_dir)
        got = fetch_chain_stat("difficulty", date(2017, 1, 5), date(2017, 1, 10), cfg)
        assert got.dates[0] >= date(2017, 1, 5) and got.dates[-1] <= date(2017, 1, 10)
        assert len(got) == 6

    def test_unknown_metric(self, chainstat_fixture_dir):
        cfg = StatClientConfig(fixture_dir=chainstat_fixture_dir)
        with pytest.raises(UsageError, match="hashcats"):
            fetch_chain_stat("hashcats", date(2017, 1, 1), date(2017, 1, 2), cfg)

    def test_missing_fixture(self, tmp_path):
        cfg = StatClientConfig(fixture_dir=tmp_path)
        with pytest.raises(NotFoundError, match="difficulty"):
            fetch_chain_stat("difficulty", date(2017, 1, 1), date(2017, 1, 2), cfg)

    def test_unreachable_endpoint_is_transport_error(self):
        cfg = StatClientConfig(base_url="http://127.0.0.1:9", timeout=0.2)
        with pytest.raises(TransportError):
            fetch_chain_stat("difficulty", date(2017, 1, 1), date(2017, 1, 2), cfg)

    def test_env_overrides(self, monkeypatch, tmp_path):
        monkeypatch.setenv("PIVOTCAST_STAT_FIXTURES", str(tmp_path))
        monkeypatch.setenv("PIVOTCAST_STAT_TIMEOUT", "3.5")
        cfg = StatClientConfig(base_url="http://example.invalid").with_env_overrides()
        assert cfg.fixture_dir == tmp_path
        assert cfg.timeout == 3.5


def _series(name, start_day, values):
    dates = tuple(date(2017, 1, start_day) + timedelta(days=i) for i in range(len(values)))
    return TimeSeries(name, dates, np.array(values, dtype=float))


class TestAlign:
    def test_identical_dates(self):
        a = _series("a", 1, [1.0, 2.0, 3.0])
        b = _series("b", 1, [4.0, 5.0, 6.0])
        ds = align([a, b], AlignPolicy("intersect"))
        assert ds.dates == a.dates
        assert set(ds.columns) == {"a", "b"}

    def test_intersect_overlap(self):
        a = _series("a", 1, list(range(10)))  # days 1..10
        b = _series("b", 5, list(range(11)))  # days 5..15
        ds = align([a, b], AlignPolicy("intersect"))
        assert ds.dates[0] == date(2017, 1, 5)
        assert ds.dates[-1] == date(2017, 1, 10)
        assert len(ds.dates) == 6

    def test_forward_fill_uses_previous_value(self):
        # day 7 missing from b; with max_gap 2 it takes day 6's value
        a = _series("a", 1, list(range(1, 11)))
        b_dates = tuple(
            d for d in a.dates if d != date(2017, 1, 7)
        )
        b_vals = np.array([float(d.day) * 10 for d in b_dates])
        b = TimeSeries("b", b_dates, b_vals)
        ds = align([a, b], AlignPolicy("forward_fill", max_gap_days=2))
        i = ds.dates.index(date(2017, 1, 7))
        assert ds.columns["b"][i] == 60.0

    def test_empty_intersection_errors(self):
        a = _series("a", 1, [1.0, 2.0])
        b = _series("b", 20, [1.0, 2.0])
        with pytest.raises(AlignmentError, match="empty"):
            align([a, b], AlignPolicy("intersect"))

    def test_gap_exceeding_cap_names_series_and_date(self):
        a = _series("a", 1, list(range(12)))
        b_dates = (date(2017, 1, 1), date(2017, 1, 12))
        b = TimeSeries("b", b_dates, np.array([1.0, 2.0]))
        with pytest.raises(AlignmentError, match="'b'.*2017-01-0[45]"):
            align([a, b], AlignPolicy("forward_fill", max_gap_days=3))

    def test_order_insensitive(self):
        a = _series("a", 1, [1.0, 2.0, 3.0])
        b = _series("b", 2, [4.0, 5.0, 6.0])
        ab = align([a, b], AlignPolicy("intersect"))
        ba = align([b, a], AlignPolicy("intersect"), target_name="a")
        assert ab.dates == ba.dates
        for name in ("a", "b"):
            assert np.array_equal(ab.columns[name], ba.columns[name])

    def test_intersect_output_dates_subset_of_inputs(self):
        rng = np.random.default_rng(3)
        series = []
        for name in ("a", "b", "c"):
            start = int(rng.integers(1, 5))
            length = int(rng.integers(8, 15))
            series.append(_series(name, start, list(rng.normal(size=length))))
        ds = align(series, AlignPolicy("intersect"))
        for s in series:
            assert set(ds.dates) <= set(s.dates)

    def test_needs_at_least_one_series(self):
        with pytest.raises(UsageError):
            align([], AlignPolicy("intersect"))
