"""
Heavy-tail statistics for avalanche sizes and final wealth: log-binned
histograms, continuous power-law and exponential maximum-likelihood fits,
and a log-likelihood model comparison.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from utils.errors import FitError

logger = logging.getLogger(__name__)

MIN_FIT_SAMPLES = 50
LOW_CONFIDENCE_SAMPLES = 50
DEFAULT_BINS_PER_DECADE = 10
# Discrete avalanche sizes are fitted with the continuous MLE above this cutoff.
AVALANCHE_XMIN = 5.0

POWERLAW = "powerlaw"
EXPONENTIAL = "exponential"


@dataclass(frozen=True, eq=False)
class Histogram:
    edges: np.ndarray
    density: np.ndarray
    count: int

    @property
    def centers(self) -> np.ndarray:
        return np.sqrt(self.edges[:-1] * self.edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)


@dataclass(frozen=True)
class DistributionFit:
    model: str
    parameter: float  # exponent (negative) for powerlaw, rate for exponential
    x_min: float
    n_tail: int
    log_likelihood: float
    method: str = "mle"
    binned_slope: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "model": self.model,
            "exponent" if self.model == POWERLAW else "rate": self.parameter,
            "x_min": self.x_min,
            "n_tail": self.n_tail,
            "log_likelihood": self.log_likelihood,
            "method": self.method,
        }
        if self.binned_slope is not None:
            out["binned_slope"] = self.binned_slope
        return out


@dataclass(frozen=True)
class ModelComparison:
    preferred: str
    log_likelihood_ratio: float  # powerlaw minus exponential
    normalized_ratio: float
    low_confidence: bool
    powerlaw: DistributionFit
    exponential: DistributionFit

    def to_dict(self) -> dict:
        return {
            "preferred": self.preferred,
            "log_likelihood_ratio": self.log_likelihood_ratio,
            "normalized_ratio": self.normalized_ratio,
            "low_confidence": self.low_confidence,
            "powerlaw": self.powerlaw.to_dict(),
            "exponential": self.exponential.to_dict(),
        }


def _positive(values) -> np.ndarray:
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise FitError("no samples")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise FitError("all samples must be finite and > 0")
    return x


def log_binned_histogram(values, bins_per_decade: int = DEFAULT_BINS_PER_DECADE) -> Histogram:
    """Geometric bins spanning [min, max]; density = count / (width * total)."""
    x = _positive(values)
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        edges = np.array([lo, lo * 10 ** (1.0 / bins_per_decade)])
    else:
        n_bins = max(1, int(math.ceil(math.log10(hi / lo) * bins_per_decade)))
        edges = np.geomspace(lo, hi, n_bins + 1)
    counts, _ = np.histogram(x, bins=edges)
    density = counts / (np.diff(edges) * x.size)
    return Histogram(edges=edges, density=density, count=int(x.size))


def _tail(values, x_min: Optional[float], min_samples: int):
    x = _positive(values)
    x_min = float(x.min()) if x_min is None else float(x_min)
    tail = x[x >= x_min]
    if tail.size < min_samples:
        raise FitError(f"{tail.size} samples >= x_min={x_min:g}; need {min_samples}")
    return tail, x_min


def _binned_slope(tail: np.ndarray, bins_per_decade: int) -> Optional[float]:
    if tail.max() == tail.min():
        return None
    hist = log_binned_histogram(tail, bins_per_decade)
    keep = hist.density > 0
    if keep.sum() < 2:
        return None
    slope, _ = np.polyfit(np.log10(hist.centers[keep]), np.log10(hist.density[keep]), 1)
    return float(slope)


def _powerlaw_loglik_terms(tail: np.ndarray, x_min: float, a: float) -> np.ndarray:
    return math.log(a - 1.0) - math.log(x_min) - a * np.log(tail / x_min)


def _exponential_loglik_terms(tail: np.ndarray, x_min: float, rate: float) -> np.ndarray:
    return math.log(rate) - rate * (tail - x_min)


def fit_power_law(
    values,
    x_min: Optional[float] = None,
    min_samples: int = MIN_FIT_SAMPLES,
    bins_per_decade: int = DEFAULT_BINS_PER_DECADE,
) -> DistributionFit:
    """Continuous MLE: exponent = -(1 + n / sum(ln(x / x_min)))."""
    tail, x_min = _tail(values, x_min, min_samples)
    log_sum = float(np.sum(np.log(tail / x_min)))
    if log_sum <= 0:
        raise FitError("degenerate sample: every value equals x_min")
    a = 1.0 + tail.size / log_sum
    ll = float(np.sum(_powerlaw_loglik_terms(tail, x_min, a)))
    return DistributionFit(POWERLAW, -a, x_min, int(tail.size), ll, "mle", _binned_slope(tail, bins_per_decade))


def fit_exponential(values, x_min: Optional[float] = None, min_samples: int = MIN_FIT_SAMPLES) -> DistributionFit:
    """MLE rate = 1 / mean(x - x_min)."""
    tail, x_min = _tail(values, x_min, min_samples)
    excess = float(np.mean(tail - x_min))
    if excess <= 0:
        raise FitError("degenerate sample: every value equals x_min")
    rate = 1.0 / excess
    ll = float(np.sum(_exponential_loglik_terms(tail, x_min, rate)))
    return DistributionFit(EXPONENTIAL, rate, x_min, int(tail.size), ll)


def compare_models(values, x_min: Optional[float] = None) -> ModelComparison:
    """Prefer the model with the higher log-likelihood on the same tail."""
    pl = fit_power_law(values, x_min, min_samples=2)
    ex = fit_exponential(values, pl.x_min, min_samples=2)
    tail, _ = _tail(values, pl.x_min, 2)
    diff = (_powerlaw_loglik_terms(tail, pl.x_min, -pl.parameter)
            - _exponential_loglik_terms(tail, ex.x_min, ex.parameter))
    ratio = float(diff.sum())
    spread = float(diff.std())
    normalized = ratio / (spread * math.sqrt(tail.size)) if spread > 0 else 0.0
    return ModelComparison(
        preferred=POWERLAW if ratio > 0 else EXPONENTIAL,
        log_likelihood_ratio=ratio,
        normalized_ratio=normalized,
        low_confidence=tail.size < LOW_CONFIDENCE_SAMPLES or abs(normalized) < 1.0,
        powerlaw=pl,
        exponential=ex,
    )


def sample_power_law(exponent: float, x_min: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws from p(x) ~ x^exponent on [x_min, inf); exponent < -1."""
    a = -exponent
    if a <= 1:
        raise FitError(f"power-law exponent must be < -1, got {exponent}")
    return x_min * (1.0 - rng.random(size)) ** (-1.0 / (a - 1.0))


def sample_exponential(rate: float, x_min: float, size: int, rng: np.random.Generator) -> np.ndarray:
    if rate <= 0:
        raise FitError(f"rate must be positive, got {rate}")
    return x_min - np.log(1.0 - rng.random(size)) / rate
