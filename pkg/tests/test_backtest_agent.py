import numpy as np
import pytest

from agents.backtest_agent import BacktestAgent, BacktestConfig, realized_moves, run_backtest
from agents.strategy_agent import MOM, RND, RSI, StrategySpec
from utils.data_providers import IndexSeries, synth_series
from utils.errors import BacktestError


def test_momentum_wins_every_day_on_rising_series(ramp):
    stats = run_backtest(ramp, BacktestConfig(n_windows=3, runs=2, strategies=(StrategySpec(MOM),)))
    assert stats.mean_win[MOM] == 100.0
    assert stats.std_win[MOM] == 0.0
    assert stats.window_size == 66
    assert stats.scored_days == 198 - 7


def test_scored_days_partition_windows(gbm):
    stats = run_backtest(gbm, BacktestConfig(n_windows=9, runs=1))
    assert int(stats.window_scored.sum()) == stats.scored_days
    assert len(stats.volatility) == 9
    for kind in stats.kinds:
        assert np.allclose(stats.window_wins[kind], stats.window_win[kind] * stats.window_scored / 100.0)


def test_random_traders_win_half_the_time(gbm):
    stats = run_backtest(gbm, BacktestConfig(n_windows=3, runs=10, seed=1))
    assert stats.mean_win[RND] == pytest.approx(50.0, abs=3.0)


def test_deterministic_strategies_ignore_runs(gbm):
    one = run_backtest(gbm, BacktestConfig(n_windows=3, runs=1))
    five = run_backtest(gbm, BacktestConfig(n_windows=3, runs=5, max_workers=2))
    for kind in (MOM, RSI):
        assert np.array_equal(one.window_win[kind], five.window_win[kind])


def test_backtest_is_reproducible(gbm):
    cfg = BacktestConfig(n_windows=9, runs=3, seed=7)
    assert np.array_equal(run_backtest(gbm, cfg).window_win[RND], run_backtest(gbm, cfg).window_win[RND])


def test_flat_days_lose():
    flat = IndexSeries(np.full(100, 10.0))
    stats = run_backtest(flat, BacktestConfig(n_windows=3, runs=1, strategies=(StrategySpec(MOM),)))
    assert stats.mean_win[MOM] == 0.0
    assert realized_moves(flat).tolist() == [0] * 99


def test_summary_keys(ramp):
    summary = run_backtest(ramp, BacktestConfig(n_windows=3, runs=1)).summary()
    assert set(summary["mean_win"]) == {"rnd", "mom", "rsi"}


def test_backtest_errors():
    with pytest.raises(BacktestError):
        BacktestConfig(n_windows=0)
    with pytest.raises(BacktestError):
        BacktestConfig(runs=0)
    short = IndexSeries(np.arange(1.0, 21.0))
    with pytest.raises(BacktestError):
        run_backtest(short, BacktestConfig(n_windows=3))
    with pytest.raises(BacktestError):
        run_backtest(short, BacktestConfig(n_windows=30))


def test_std_is_taken_across_run_averaged_windows(gbm):
    stats = BacktestAgent(BacktestConfig(n_windows=9, runs=4, seed=3)).run(gbm)
    for kind in stats.kinds:
        assert stats.std_win[kind] == pytest.approx(float(np.std(stats.window_win[kind])))
        assert stats.mean_win[kind] == pytest.approx(float(np.mean(stats.window_win[kind])))


def test_agent_defaults_and_function_agree(gbm):
    cfg = BacktestConfig(n_windows=3, runs=2, seed=5)
    a = BacktestAgent(cfg).run(gbm)
    b = run_backtest(gbm, cfg)
    assert a.summary() == b.summary()
    assert BacktestAgent().cfg.n_windows == 30


@pytest.mark.slow
def test_random_traders_hold_a_narrow_band_on_gbm():
    narrowest = {n_windows: 0 for n_windows in (3, 9, 18, 30)}
    for seed in range(10):
        series = synth_series("gbm", length=5000, sigma=0.01, seed=seed)
        for n_windows in narrowest:
            stats = run_backtest(series, BacktestConfig(n_windows=n_windows, runs=10, seed=seed))
            for kind in (RND, MOM, RSI):
                assert 46.0 <= stats.mean_win[kind] <= 54.0
            if stats.std_win[RND] <= min(stats.std_win[MOM], stats.std_win[RSI]):
                narrowest[n_windows] += 1
    assert all(count >= 8 for count in narrowest.values()), narrowest
