"""
Strategy Agent - daily direction predictors: random (RND), momentum (MOM)
and RSI divergence (RSI).

Day indices are 0-based positions in the series. A predictor called at day j
only reads F_0..F_j.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from utils.data_providers import IndexSeries
from utils.errors import InsufficientHistoryError, StrategyError

logger = logging.getLogger(__name__)

RND = "RND"
MOM = "MOM"
RSI = "RSI"
STRATEGY_KINDS = (RND, MOM, RSI)

DEFAULT_MOM_LAG = 7
DEFAULT_RSI_PERIOD = 14


class Direction(Enum):
    UP = 1
    DOWN = -1

    @classmethod
    def of_move(cls, delta: float) -> "Direction":
        """Sign of a price move; zero counts as UP (the documented tie-break)."""
        return cls.UP if delta >= 0 else cls.DOWN

    def flipped(self) -> "Direction":
        return Direction.DOWN if self is Direction.UP else Direction.UP

    def __str__(self) -> str:
        return "up" if self is Direction.UP else "down"


@dataclass(frozen=True)
class StrategySpec:
    kind: str
    mom_lag: int = DEFAULT_MOM_LAG
    rsi_lookback: int = DEFAULT_RSI_PERIOD
    rsi_trend: int = DEFAULT_RSI_PERIOD

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in STRATEGY_KINDS:
            raise StrategyError(f"unknown strategy {self.kind!r}; expected one of {STRATEGY_KINDS}")
        object.__setattr__(self, "kind", kind)
        if self.mom_lag < 1:
            raise StrategyError(f"momentum lag must be >= 1, got {self.mom_lag}")
        if self.rsi_lookback < 1 or self.rsi_trend < 1:
            raise StrategyError(f"RSI lookback and trend period must be >= 1, got {self.rsi_lookback}/{self.rsi_trend}")

    @property
    def warmup(self) -> int:
        """First day index at which this strategy can predict."""
        if self.kind == MOM:
            return self.mom_lag
        if self.kind == RSI:
            return self.rsi_lookback + self.rsi_trend
        return 0


def predict_rnd(rng: np.random.Generator) -> Direction:
    """Fair coin; consumes exactly one uniform draw."""
    return Direction.UP if rng.random() < 0.5 else Direction.DOWN


def predict_mom(series: IndexSeries, j: int, lag: int = DEFAULT_MOM_LAG) -> Direction:
    """Sign of M(j) = F_j - F_{j-lag}."""
    if j - lag < 0 or j >= len(series):
        raise InsufficientHistoryError(f"momentum at day {j} needs {lag} days of history")
    f = series.values
    return Direction.of_move(f[j] - f[j - lag])


def rsi_value(series: IndexSeries, j: int, lookback: int = DEFAULT_RSI_PERIOD) -> float:
    """RSI(j) = 100 - 100 / (1 + RS) over the returns dated j-lookback+1 .. j.

    RS is the plain sum of gains over the absolute sum of losses (no smoothing).
    Only gains -> 100, only losses -> 0, flat window -> 50.
    """
    if j - lookback < 0 or j >= len(series):
        raise InsufficientHistoryError(f"RSI at day {j} needs {lookback} returns of history")
    f = series.values[j - lookback:j + 1]
    r = np.diff(f) / f[:-1]
    gains = float(r[r > 0].sum())
    losses = float(-r[r < 0].sum())
    if losses == 0.0:
        return 50.0 if gains == 0.0 else 100.0
    if gains == 0.0:
        return 0.0
    return 100.0 - 100.0 / (1.0 + gains / losses)


def predict_rsi(series: IndexSeries, j: int, spec: Optional[StrategySpec] = None) -> Direction:
    """Divergence rule over the last T_RSI days.

    price trend = sign(F_j - F_{j-T}), tie -> UP
    rsi trend   = sign(RSI(j) - RSI(j-T)), tie -> same as price trend
    Disagreement predicts a reversal of the price trend, agreement its continuation.
    """
    spec = spec or StrategySpec(RSI)
    trend = spec.rsi_trend
    if j - trend - spec.rsi_lookback < 0:
        raise InsufficientHistoryError(
            f"RSI divergence at day {j} needs {trend + spec.rsi_lookback} days of history"
        )
    f = series.values
    price = Direction.of_move(f[j] - f[j - trend])
    delta = rsi_value(series, j, spec.rsi_lookback) - rsi_value(series, j - trend, spec.rsi_lookback)
    momentum = price if delta == 0 else Direction.of_move(delta)
    return price if momentum is price else price.flipped()


class StrategyAgent:
    """One trader following a single StrategySpec."""

    def __init__(self, spec: StrategySpec, rng: Optional[np.random.Generator] = None):
        if spec.kind == RND and rng is None:
            raise StrategyError("a random strategy needs a generator")
        self.spec = spec
        self.rng = rng

    @property
    def warmup(self) -> int:
        return self.spec.warmup

    def predict(self, series: IndexSeries, j: int) -> Direction:
        if self.spec.kind == RND:
            return predict_rnd(self.rng)
        if self.spec.kind == MOM:
            return predict_mom(series, j, self.spec.mom_lag)
        return predict_rsi(series, j, self.spec)


def parse_strategies(text: str, mom_lag: int = DEFAULT_MOM_LAG, rsi_period: int = DEFAULT_RSI_PERIOD) -> tuple:
    """'rnd,mom,rsi' -> StrategySpec tuple, order preserved, duplicates dropped."""
    specs = []
    for token in (t.strip() for t in text.split(",")):
        if not token:
            continue
        spec = StrategySpec(token, mom_lag=mom_lag, rsi_lookback=rsi_period, rsi_trend=rsi_period)
        if spec.kind not in (s.kind for s in specs):
            specs.append(spec)
    if not specs:
        raise StrategyError("no strategies selected")
    return tuple(specs)
