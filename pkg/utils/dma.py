"""
Detrending moving average (DMA) analysis: sigma_DMA(n) curves, the global
Hurst exponent and its sliding-window profile.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from utils.data_providers import IndexSeries
from utils.errors import DMAError

logger = logging.getLogger(__name__)

DEFAULT_POINTS_PER_DECADE = 24
DEFAULT_SLIDING_WINDOW = 1000
DEFAULT_SLIDING_STEP = 20

PREFACTORS = ("terms", "reduced")


@dataclass(frozen=True, eq=False)
class HurstProfile:
    n: np.ndarray
    sigma: np.ndarray
    hurst: float
    intercept: float
    residual: float

    def to_dict(self) -> dict:
        return {
            "hurst": self.hurst,
            "intercept": self.intercept,
            "residual": self.residual,
            "n_points": int(len(self.n)),
            "n_min": int(self.n[0]),
            "n_max": int(self.n[-1]),
        }


@dataclass(frozen=True, eq=False)
class SlidingHurst:
    days: np.ndarray
    hurst: np.ndarray
    window: int
    step: int


def _sigma(shifted: np.ndarray, csum: np.ndarray, n: int, prefactor: str) -> float:
    t = len(shifted)
    # backward moving average over F_{j-n+1..j}, defined for j = n-1 .. T-1
    trend = (csum[n:] - csum[:-n]) / n
    resid = shifted[n - 1:] - trend
    denom = t - n + 1 if prefactor == "terms" else t - n
    return float(np.sqrt(np.dot(resid, resid) / denom))


def _prepare(values: np.ndarray):
    # Shift invariance is exact: the first close is subtracted before any sum.
    shifted = values - values[0]
    return shifted, np.concatenate(([0.0], np.cumsum(shifted)))


def dma_sigma(series: IndexSeries, n: int, prefactor: str = "terms") -> float:
    """sigma_DMA(n) of the series.

    prefactor="terms" divides by the T-n+1 summed residuals; "reduced" divides
    by T-n instead.
    """
    if prefactor not in PREFACTORS:
        raise DMAError(f"unknown prefactor {prefactor!r}")
    t = len(series)
    if not 2 <= n <= t // 2:
        raise DMAError(f"window size n={n} outside [2, {t // 2}] for T={t}")
    shifted, csum = _prepare(series.values)
    return _sigma(shifted, csum, n, prefactor)


def n_grid(length: int, points_per_decade: int = DEFAULT_POINTS_PER_DECADE) -> np.ndarray:
    """Distinct integer window sizes on a geometric grid over [2, T/2]."""
    n_max = length // 2
    if n_max < 2:
        raise DMAError(f"series of {length} days too short for a DMA grid")
    decades = np.log10(n_max / 2.0)
    count = max(2, int(np.ceil(decades * points_per_decade)) + 1)
    grid = np.unique(np.rint(np.geomspace(2, n_max, count)).astype(int))
    return grid[(grid >= 2) & (grid <= n_max)]


def hurst_global(
    series: IndexSeries,
    points_per_decade: int = DEFAULT_POINTS_PER_DECADE,
    prefactor: str = "terms",
    grid: Optional[np.ndarray] = None,
) -> HurstProfile:
    """Fit sigma_DMA(n) ~ n^H by unweighted least squares in log-log space."""
    t = len(series)
    if t < 8:
        raise DMAError(f"Hurst fit needs T >= 8, got {t}")
    if prefactor not in PREFACTORS:
        raise DMAError(f"unknown prefactor {prefactor!r}")
    ns = n_grid(t, points_per_decade) if grid is None else np.asarray(grid, dtype=int)
    if len(ns) < 5:
        raise DMAError(f"n grid has {len(ns)} points, need at least 5")

    shifted, csum = _prepare(series.values)
    sigmas = np.array([_sigma(shifted, csum, int(n), prefactor) for n in ns])

    usable = sigmas > 0
    if usable.sum() < 3:
        raise DMAError(f"only {int(usable.sum())} grid points with nonzero sigma; need 3")
    x = np.log(ns[usable])
    y = np.log(sigmas[usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return HurstProfile(
        n=ns,
        sigma=sigmas,
        hurst=float(slope),
        intercept=float(intercept),
        residual=float(np.sqrt(np.mean(resid ** 2))),
    )


def hurst_sliding(
    series: IndexSeries,
    window: int = DEFAULT_SLIDING_WINDOW,
    step: int = DEFAULT_SLIDING_STEP,
    points_per_decade: int = DEFAULT_POINTS_PER_DECADE,
    prefactor: str = "terms",
    max_workers: int = 1,
) -> SlidingHurst:
    """H(j) from `hurst_global` on every slice [j, j+T_s), j = 0, s, 2s, ... <= T - T_s."""
    t = len(series)
    if window > t:
        raise DMAError(f"sliding window T_s={window} longer than series T={t}")
    if step < 1:
        raise DMAError(f"sliding step must be >= 1, got {step}")
    starts = np.arange(0, t - window + 1, step)

    def _one(j: int) -> float:
        return hurst_global(series.slice(int(j), int(j) + window), points_per_decade, prefactor).hurst

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            hs = list(pool.map(_one, starts))
    else:
        hs = [_one(j) for j in starts]
    logger.debug("sliding Hurst: %d windows of %d days", len(starts), window)
    return SlidingHurst(days=starts, hurst=np.array(hs), window=window, step=step)
