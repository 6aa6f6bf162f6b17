"""
Backtest Agent - walks non-interacting RND / MOM / RSI traders along an index
series day by day and scores their daily direction calls per trading window.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from agents.strategy_agent import (
    RND,
    StrategyAgent,
    StrategySpec,
    predict_mom,
    predict_rsi,
)
from utils.data_providers import IndexSeries, window_bounds, window_volatility
from utils.errors import BacktestError, SeriesError
from utils.seeding import derive_seed, make_rng

logger = logging.getLogger(__name__)

DEFAULT_WINDOWS = (3, 9, 18, 30)
DEFAULT_RUNS = 10


@dataclass(frozen=True)
class BacktestConfig:
    n_windows: int = 30
    runs: int = DEFAULT_RUNS
    strategies: tuple = (StrategySpec("RND"), StrategySpec("MOM"), StrategySpec("RSI"))
    seed: int = 42
    max_workers: int = 1

    def __post_init__(self):
        if self.n_windows < 1:
            raise BacktestError(f"n_windows must be >= 1, got {self.n_windows}")
        if self.runs < 1:
            raise BacktestError(f"runs must be >= 1, got {self.runs}")
        if not self.strategies:
            raise BacktestError("at least one strategy is required")


@dataclass(frozen=True, eq=False)
class WindowStats:
    """Run-averaged win percentages per strategy.

    window_win[kind][k]: win % inside window k, averaged over runs.
    mean_win[kind]/std_win[kind]: mean and population std of window_win[kind]
    across windows.
    """

    n_windows: int
    window_size: int
    runs: int
    scored_days: int
    window_scored: np.ndarray
    volatility: np.ndarray
    window_win: dict = field(default_factory=dict)
    window_wins: dict = field(default_factory=dict)
    mean_win: dict = field(default_factory=dict)
    std_win: dict = field(default_factory=dict)

    @property
    def kinds(self) -> tuple:
        return tuple(self.window_win)

    def summary(self) -> dict:
        return {
            "n_windows": self.n_windows,
            "window_size": self.window_size,
            "runs": self.runs,
            "scored_days": self.scored_days,
            "mean_win": {k.lower(): v for k, v in self.mean_win.items()},
            "std_win": {k.lower(): v for k, v in self.std_win.items()},
        }


def realized_moves(series: IndexSeries) -> np.ndarray:
    """+1 / -1 / 0 for F_{j+1} - F_j, j = 0 .. T-2."""
    return np.sign(np.diff(series.values)).astype(int)


def _deterministic_calls(series: IndexSeries, spec: StrategySpec, days: range) -> np.ndarray:
    if spec.kind == "MOM":
        return np.array([predict_mom(series, j, spec.mom_lag).value for j in days], dtype=int)
    return np.array([predict_rsi(series, j, spec).value for j in days], dtype=int)


def _window_wins(hits: np.ndarray, window_of_day: np.ndarray, n_windows: int) -> np.ndarray:
    return np.bincount(window_of_day, weights=hits, minlength=n_windows)


class BacktestAgent:
    """Scores every configured strategy on the same day set and aggregates per window.

    Day j is scored when every enabled strategy has full history at j and
    F_{j+1} exists; the call wins iff it matches sign(F_{j+1} - F_j). A flat
    day is a loss for both directions.
    """

    def __init__(self, cfg: Optional[BacktestConfig] = None):
        self.cfg = cfg or BacktestConfig()

    def run(self, series: IndexSeries) -> WindowStats:
        cfg = self.cfg
        t = len(series)
        warmup = max(spec.warmup for spec in cfg.strategies)
        try:
            bounds = window_bounds(t, cfg.n_windows)
        except SeriesError as e:
            raise BacktestError(str(e)) from None
        size = bounds[0][1] - bounds[0][0]
        last = min(t - 1, cfg.n_windows * size)
        days = range(warmup, last)
        if len(days) < cfg.n_windows:
            raise BacktestError(f"series of {t} days too short for warm-up {warmup} and {cfg.n_windows} windows")

        window_of_day = np.array([j // size for j in days], dtype=int)
        scored = np.bincount(window_of_day, minlength=cfg.n_windows)
        if np.any(scored == 0):
            empty = int(np.flatnonzero(scored == 0)[0])
            raise BacktestError(f"window {empty} has no scored days (warm-up {warmup}, window size {size})")

        moves = realized_moves(series)[warmup:last]

        def _score(calls: np.ndarray) -> np.ndarray:
            hits = (calls == moves).astype(float)
            return 100.0 * _window_wins(hits, window_of_day, cfg.n_windows) / scored

        deterministic = {
            spec.kind: _score(_deterministic_calls(series, spec, days))
            for spec in cfg.strategies if spec.kind != RND
        }

        def _run(run: int) -> dict:
            out = dict(deterministic)
            for spec in cfg.strategies:
                if spec.kind == RND:
                    agent = StrategyAgent(spec, make_rng(derive_seed(cfg.seed, run)))
                    calls = np.array([agent.predict(series, j).value for j in days], dtype=int)
                    out[RND] = _score(calls)
            return out

        if cfg.max_workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.max_workers) as pool:
                per_run = list(pool.map(_run, range(cfg.runs)))
        else:
            per_run = [_run(r) for r in range(cfg.runs)]

        kinds = [spec.kind for spec in cfg.strategies]
        window_win, window_wins, mean_win, std_win = {}, {}, {}, {}
        for kind in kinds:
            stack = np.array([run[kind] for run in per_run])
            window_win[kind] = stack.mean(axis=0)
            window_wins[kind] = window_win[kind] * scored / 100.0
            mean_win[kind] = float(window_win[kind].mean())
            std_win[kind] = float(window_win[kind].std())

        logger.info(
            "✅ Backtest N_w=%d over %d scored days: %s",
            cfg.n_windows, len(days),
            ", ".join(f"{k} {mean_win[k]:.2f}±{std_win[k]:.2f}%" for k in kinds),
        )
        return WindowStats(
            n_windows=cfg.n_windows,
            window_size=size,
            runs=cfg.runs,
            scored_days=len(days),
            window_scored=scored,
            volatility=window_volatility(series, cfg.n_windows).volatility,
            window_win=window_win,
            window_wins=window_wins,
            mean_win=mean_win,
            std_win=std_win,
        )


def run_backtest(series: IndexSeries, cfg: BacktestConfig) -> WindowStats:
    return BacktestAgent(cfg).run(series)
