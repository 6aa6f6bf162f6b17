import sys
import types

import numpy as np
import pandas as pd
import pytest

from utils.data_providers import (
    IndexSeries,
    fetch_series,
    load_series,
    returns,
    synth_series,
    window_bounds,
    window_volatility,
)
from utils.errors import SeriesError


# ── load_series ──────────────────────────────────────────────────────────

def test_load_headerless_single_column(write_csv):
    series = load_series(write_csv("100.0\n101.0\n99.5\n"))
    assert len(series) == 3
    assert series.values.tolist() == [100.0, 101.0, 99.5]
    assert series.dates is None
    assert series.label == "series"


def test_load_picks_close_and_date_columns(write_csv):
    path = write_csv("Date,Open,Close\n2020-01-02,1,100\n2020-01-03,1,102\n2020-01-06,1,101\n")
    series = load_series(path)
    assert series.values.tolist() == [100.0, 102.0, 101.0]
    assert series.dates == ("2020-01-02", "2020-01-03", "2020-01-06")


def test_load_column_by_index_and_name(write_csv):
    path = write_csv("a,b\n5,10\n6,11\n")
    assert load_series(path, column=0).values.tolist() == [5.0, 6.0]
    assert load_series(path, column="b").values.tolist() == [10.0, 11.0]
    with pytest.raises(SeriesError, match="not found"):
        load_series(path, column="zzz")


def test_load_rejects_zero_price_with_row_number(write_csv):
    path = write_csv("Close\n100\n0\n101\n")
    with pytest.raises(SeriesError, match="row 3"):
        load_series(path)


def test_load_rejects_non_numeric(write_csv):
    with pytest.raises(SeriesError, match="row 2"):
        load_series(write_csv("100\nabc\n"))


def test_load_missing_file_and_short_file(tmp_path, write_csv):
    with pytest.raises(SeriesError, match="not found"):
        load_series(tmp_path / "nope.csv")
    with pytest.raises(SeriesError, match="at least 2"):
        load_series(write_csv("Close\n100\n"))


# ── IndexSeries ──────────────────────────────────────────────────────────

def test_index_series_invariants():
    with pytest.raises(SeriesError):
        IndexSeries([100.0])
    with pytest.raises(SeriesError, match="index 1"):
        IndexSeries([100.0, -1.0])
    with pytest.raises(SeriesError, match="increasing"):
        IndexSeries([1.0, 2.0], dates=("2020-01-02", "2020-01-01"))
    series = IndexSeries([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        series.values[0] = 5.0


# ── returns ──────────────────────────────────────────────────────────────

def test_returns_hand_arithmetic():
    r = returns(IndexSeries([100.0, 110.0, 99.0])).values
    assert r == pytest.approx([0.10, -0.10])


def test_returns_constant_and_geometric():
    assert np.all(returns(IndexSeries(np.full(10, 5.0))).values == 0.0)
    assert np.allclose(returns(IndexSeries(2.0 ** np.arange(20))).values, 1.0)


def test_returns_reconstruct_series(gbm):
    r = returns(gbm).values
    rebuilt = gbm.values[0] * np.concatenate(([1.0], np.cumprod(1.0 + r)))
    assert np.max(np.abs(rebuilt / gbm.values - 1.0)) < 1e-12
    assert len(r) == len(gbm) - 1


# ── window_volatility ────────────────────────────────────────────────────

def test_window_volatility_constant_is_zero():
    profile = window_volatility(IndexSeries(np.full(90, 3.0)), 3)
    assert profile.n_windows == 3
    assert profile.window_size == 30
    assert np.all(profile.volatility == 0.0)


def test_window_volatility_alternating_returns():
    steps = np.where(np.arange(100) % 2 == 0, 1.01, 0.99)
    series = IndexSeries(100.0 * np.concatenate(([1.0], np.cumprod(steps))))
    assert window_volatility(series, 1).volatility[0] == pytest.approx(0.01, abs=1e-12)


def test_window_volatility_single_window_is_full_std(gbm):
    assert window_volatility(gbm, 1).volatility[0] == pytest.approx(np.std(returns(gbm).values), rel=1e-12)


def test_window_bounds_drop_remainder():
    assert window_bounds(10, 3) == [(0, 3), (3, 6), (6, 9)]
    with pytest.raises(SeriesError):
        window_bounds(5, 3)


@pytest.mark.slow
def test_window_volatility_matches_gbm_sigma():
    for seed in range(50):
        vols = window_volatility(synth_series("gbm", length=3000, sigma=0.02, seed=seed), 3).volatility
        assert np.all(np.abs(vols - 0.02) < 0.004)


# ── synth_series ─────────────────────────────────────────────────────────

def test_synth_zero_sigma_is_constant():
    series = synth_series("gbm", length=50, mu=0.0, sigma=0.0, seed=1)
    assert np.all(series.values == 100.0)
    assert np.all(returns(series).values == 0.0)


def test_synth_is_deterministic_per_seed():
    a = synth_series("gbm", length=500, seed=11)
    b = synth_series("gbm", length=500, seed=11)
    c = synth_series("gbm", length=500, seed=12)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_synth_walk_stays_positive():
    series = synth_series("iid-gaussian-walk", length=5000, sigma=5.0, start=1.0, seed=4)
    assert series.values.min() == pytest.approx(1.0)
    assert series.label == "iid-gaussian-walk-seed4"


def test_synth_rejects_bad_params():
    with pytest.raises(SeriesError):
        synth_series("levy", length=10)
    with pytest.raises(SeriesError):
        synth_series("gbm", length=1)
    with pytest.raises(SeriesError):
        synth_series("gbm", sigma=-0.1)


@pytest.mark.slow
def test_synth_gbm_returns_mean_near_zero():
    for seed in range(20):
        r = returns(synth_series("gbm", length=5750, sigma=0.01, seed=seed)).values
        assert abs(r.mean()) < 0.001


# ── fetch_series ─────────────────────────────────────────────────────────

def _fake_yfinance(history):
    class Ticker:
        def __init__(self, symbol):
            self.symbol = symbol

        def history(self, **kwargs):
            return history

    return types.SimpleNamespace(Ticker=Ticker)


def test_fetch_writes_loadable_csv(tmp_path, monkeypatch):
    hist = pd.DataFrame(
        {"Close": [10.0, 11.0, 12.5]},
        index=pd.to_datetime(["2021-03-01", "2021-03-02", "2021-03-03"]),
    )
    monkeypatch.setitem(sys.modules, "yfinance", _fake_yfinance(hist))
    target = tmp_path / "spx.csv"
    series = fetch_series("spx", target)
    assert series.label == "SPX"
    reloaded = load_series(target)
    assert reloaded.values.tolist() == [10.0, 11.0, 12.5]
    assert reloaded.dates == ("2021-03-01", "2021-03-02", "2021-03-03")


def test_fetch_empty_history_is_an_error(tmp_path, monkeypatch):
    monkeypatch.setitem(sys.modules, "yfinance", _fake_yfinance(pd.DataFrame()))
    monkeypatch.setattr("utils.data_providers.time.sleep", lambda s: None)
    with pytest.raises(SeriesError, match="no price history"):
        fetch_series("none", tmp_path / "x.csv")
