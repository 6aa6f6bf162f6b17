import numpy as np
import pytest

from agents.strategy_agent import (
    MOM,
    RND,
    RSI,
    Direction,
    StrategyAgent,
    StrategySpec,
    parse_strategies,
    predict_mom,
    predict_rnd,
    predict_rsi,
    rsi_value,
)
from utils.data_providers import IndexSeries
from utils.errors import InsufficientHistoryError, StrategyError
from utils.seeding import make_rng


def test_direction_tie_is_up():
    assert Direction.of_move(0.0) is Direction.UP
    assert Direction.of_move(-1e-9) is Direction.DOWN
    assert Direction.UP.flipped() is Direction.DOWN
    assert str(Direction.DOWN) == "down"


def test_momentum_direction(ramp):
    assert predict_mom(ramp, 7) is Direction.UP
    falling = IndexSeries(np.arange(100.0, 0.0, -1.0))
    assert predict_mom(falling, 50) is Direction.DOWN
    flat = IndexSeries(np.full(20, 5.0))
    assert predict_mom(flat, 10) is Direction.UP


def test_momentum_needs_history(ramp):
    with pytest.raises(InsufficientHistoryError):
        predict_mom(ramp, 6)
    with pytest.raises(InsufficientHistoryError):
        predict_mom(ramp, 200)


def test_rsi_extremes(ramp):
    assert rsi_value(ramp, 14) == 100.0
    assert rsi_value(IndexSeries(np.arange(100.0, 50.0, -1.0)), 20) == 0.0
    assert rsi_value(IndexSeries(np.full(30, 2.0)), 20) == 50.0


def test_rsi_gain_loss_ratio_two():
    series = IndexSeries([100.0, 120.0, 108.0])
    assert rsi_value(series, 2, lookback=2) == pytest.approx(200.0 / 3.0)


def test_rsi_agreement_continues_trend(ramp):
    assert predict_rsi(ramp, 28) is Direction.UP


def test_rsi_divergence_reverses_trend():
    spec = StrategySpec(RSI, rsi_lookback=2, rsi_trend=2)
    # price up while RSI falls from 100
    assert predict_rsi(IndexSeries([100.0, 101.0, 102.0, 90.0, 103.0]), 4, spec) is Direction.DOWN
    # price down while RSI rises from 0
    assert predict_rsi(IndexSeries([100.0, 99.0, 98.0, 110.0, 97.0]), 4, spec) is Direction.UP


def test_rsi_needs_history(ramp):
    with pytest.raises(InsufficientHistoryError):
        predict_rsi(ramp, 27)


def test_rsi_is_scale_invariant(gbm):
    scaled = gbm.scaled(4.0)
    for j in range(28, 600):
        assert predict_rsi(gbm, j) is predict_rsi(scaled, j)


def test_momentum_is_scale_invariant(gbm):
    scaled = gbm.scaled(4.0)
    for j in range(7, 600):
        assert predict_mom(gbm, j) is predict_mom(scaled, j)


@pytest.mark.parametrize(
    "values, j, spec",
    [
        (np.arange(1.0, 201.0), 28, StrategySpec(RSI)),
        ([100.0, 101.0, 102.0, 90.0, 103.0], 4, StrategySpec(RSI, rsi_lookback=2, rsi_trend=2)),
    ],
    ids=["ramp", "divergence"],
)
def test_rsi_call_flips_on_mirrored_series(values, j, spec):
    values = np.asarray(values)
    mirror = values.max() + values.min() - values
    assert predict_rsi(IndexSeries(mirror), j, spec) is predict_rsi(IndexSeries(values), j, spec).flipped()


def test_rising_prices_with_fading_rsi_call_down():
    values = list(np.arange(100.0, 116.0))
    for _ in range(7):
        values.append(values[-1] * 1.03)
        values.append(values[-1] * 0.98)
    series = IndexSeries(values)
    assert len(series) == 30
    assert rsi_value(series, 15) == 100.0
    assert rsi_value(series, 29) == pytest.approx(60.0, abs=1e-6)
    assert series.values[29] > series.values[15]
    assert predict_rsi(series, 29) is Direction.DOWN


def test_random_predictor_is_fair_and_seeded():
    rng = make_rng(5)
    ups = sum(predict_rnd(rng) is Direction.UP for _ in range(10_000))
    assert 0.48 <= ups / 10_000 <= 0.52
    a = [predict_rnd(make_rng(9)) for _ in range(3)]
    b = [predict_rnd(make_rng(9)) for _ in range(3)]
    assert a == b


def test_strategy_spec_validation():
    assert StrategySpec("mom").kind == MOM
    assert StrategySpec(RND).warmup == 0
    assert StrategySpec(MOM).warmup == 7
    assert StrategySpec(RSI).warmup == 28
    with pytest.raises(StrategyError):
        StrategySpec("macd")
    with pytest.raises(StrategyError):
        StrategySpec(MOM, mom_lag=0)


def test_agent_dispatch(ramp):
    with pytest.raises(StrategyError):
        StrategyAgent(StrategySpec(RND))
    assert StrategyAgent(StrategySpec(MOM)).predict(ramp, 10) is Direction.UP
    assert StrategyAgent(StrategySpec(RND), make_rng(1)).warmup == 0


def test_parse_strategies():
    specs = parse_strategies("rsi, mom,rsi", mom_lag=3, rsi_period=5)
    assert [s.kind for s in specs] == [RSI, MOM]
    assert specs[1].mom_lag == 3
    assert specs[0].warmup == 10
    with pytest.raises(StrategyError):
        parse_strategies(" , ")
