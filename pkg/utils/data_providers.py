"""
Data providers for daily index series: CSV ingestion, synthetic generators,
returns and windowed volatility, plus an optional Yahoo Finance download.
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from utils.errors import SeriesError
from utils.seeding import make_rng

logger = logging.getLogger(__name__)

# Column names tried, in order, when no value column is given and the file has a header.
_CLOSE_COLUMNS = ("Close", "close", "Adj Close", "adj_close", "value", "Value")
_DATE_COLUMNS = ("Date", "date", "Datetime", "day")

SYNTH_MODELS = ("gbm", "iid-gaussian-walk")


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IndexSeries:
    """Daily closing values F_j of an index, in file/day order."""

    values: np.ndarray
    dates: Optional[tuple] = None
    label: str = ""

    def __post_init__(self):
        values = _frozen(self.values)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or len(values) < 2:
            raise SeriesError(f"series needs at least 2 values, got {values.size}")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            bad = int(np.flatnonzero(~(np.isfinite(values) & (values > 0)))[0])
            raise SeriesError(f"series value at index {bad} is not strictly positive: {values[bad]!r}")
        if self.dates is not None:
            dates = tuple(str(d) for d in self.dates)
            if len(dates) != len(values):
                raise SeriesError(f"{len(dates)} dates for {len(values)} values")
            if any(b <= a for a, b in zip(dates, dates[1:])):
                raise SeriesError("dates must be strictly increasing")
            object.__setattr__(self, "dates", dates)

    def __len__(self) -> int:
        return len(self.values)

    def slice(self, start: int, stop: int) -> "IndexSeries":
        dates = self.dates[start:stop] if self.dates is not None else None
        return IndexSeries(self.values[start:stop], dates, f"{self.label}[{start}:{stop}]")

    def scaled(self, factor: float) -> "IndexSeries":
        return IndexSeries(self.values * factor, self.dates, self.label)


@dataclass(frozen=True, eq=False)
class ReturnsSeries:
    """r_j = (F_{j+1} - F_j) / F_j, length T - 1."""

    values: np.ndarray
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class VolatilityProfile:
    n_windows: int
    window_size: int
    volatility: np.ndarray = field(default_factory=lambda: _frozen([]))

    def __post_init__(self):
        object.__setattr__(self, "volatility", _frozen(self.volatility))


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------

def _is_number(text) -> bool:
    try:
        float(str(text).strip())
        return True
    except ValueError:
        return False


def _resolve_column(column, names: Optional[list], width: int) -> int:
    if column is None:
        if names:
            for candidate in _CLOSE_COLUMNS:
                if candidate in names:
                    return names.index(candidate)
        return width - 1
    if isinstance(column, int) or (isinstance(column, str) and column.lstrip("-").isdigit()):
        idx = int(column)
        if idx < 0:
            idx += width
        if not 0 <= idx < width:
            raise SeriesError(f"column index {column} out of range for {width} columns")
        return idx
    if not names or column not in names:
        raise SeriesError(f"column {column!r} not found in header {names}")
    return names.index(column)


def load_series(
    path: Union[str, Path],
    column: Union[int, str, None] = None,
    date_column: Union[int, str, None] = None,
    label: Optional[str] = None,
) -> IndexSeries:
    """Read one close per row from a CSV file (header optional, decimal point only).

    `column` selects the value column by 0-based index or header name; by default
    a Close-like header column, else the last column. Dates are taken from
    `date_column` or a Date-like header column when present.
    """
    path = Path(path)
    if not path.exists():
        raise SeriesError(f"series file not found: {path}")

    raw = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True, keep_default_na=False)
    if raw.empty:
        raise SeriesError(f"{path} is empty")
    width = raw.shape[1]

    first = [str(v).strip() for v in raw.iloc[0].tolist()]
    key_column = _resolve_column(column, None, width) if column is not None and not isinstance(column, str) else None
    has_header = not _is_number(first[key_column]) if key_column is not None else not any(_is_number(v) for v in first)
    names = first if has_header else None
    body = raw.iloc[1:] if has_header else raw
    row_offset = 2 if has_header else 1

    value_idx = _resolve_column(column, names, width)
    values = []
    for i, text in enumerate(body.iloc[:, value_idx].tolist()):
        text = str(text).strip()
        try:
            value = float(text)
        except ValueError:
            raise SeriesError(f"{path}: row {i + row_offset}: non-numeric value {text!r}") from None
        if not np.isfinite(value) or value <= 0:
            raise SeriesError(f"{path}: row {i + row_offset}: value must be positive, got {text!r}")
        values.append(value)
    if len(values) < 2:
        raise SeriesError(f"{path}: need at least 2 rows, found {len(values)}")

    dates = None
    if date_column is None and names:
        date_column = next((c for c in _DATE_COLUMNS if c in names), None)
    if date_column is not None:
        date_idx = _resolve_column(date_column, names, width)
        try:
            parsed = pd.to_datetime(body.iloc[:, date_idx].str.strip())
        except (ValueError, TypeError) as e:
            raise SeriesError(f"{path}: unparseable date column: {e}") from None
        dates = tuple(d.strftime("%Y-%m-%d") for d in parsed)

    series = IndexSeries(values, dates, label or path.stem)
    logger.info("📥 Loaded %d rows from %s", len(series), path)
    return series


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

def returns(series: IndexSeries) -> ReturnsSeries:
    """Simple daily returns (F_{j+1} - F_j) / F_j."""
    f = series.values
    if len(f) < 2:
        raise SeriesError("series too short for returns")
    return ReturnsSeries(np.diff(f) / f[:-1], series.label)


def window_bounds(length: int, n_windows: int) -> list:
    """[start, stop) day ranges of N_w equal windows; the trailing remainder is dropped."""
    if n_windows < 1:
        raise SeriesError(f"number of windows must be >= 1, got {n_windows}")
    size = length // n_windows
    if size < 2:
        raise SeriesError(f"{n_windows} windows too many for a series of {length} days")
    return [(k * size, (k + 1) * size) for k in range(n_windows)]


def window_volatility(series: IndexSeries, n_windows: int) -> VolatilityProfile:
    """Population std of the returns falling inside each of N_w equal windows.

    The return dated j is (F_j - F_{j-1}) / F_{j-1}; window [a, b) holds the
    returns dated max(a, 1) .. b-1.
    """
    bounds = window_bounds(len(series), n_windows)
    r = returns(series).values
    vols = [float(np.std(r[max(a, 1) - 1:b - 1])) for a, b in bounds]
    return VolatilityProfile(n_windows, bounds[0][1], vols)


# ---------------------------------------------------------------------------
# Synthetic series
# ---------------------------------------------------------------------------

def synth_series(
    model: str = "gbm",
    length: int = 5000,
    mu: float = 0.0,
    sigma: float = 0.01,
    start: float = 100.0,
    seed: int = 0,
) -> IndexSeries:
    """Seeded synthetic daily closes.

    gbm:                F_{j+1} = F_j * exp(mu + sigma * z_j)
    iid-gaussian-walk:  X_{j+1} = X_j + mu + sigma * z_j, X_0 = 0, then
                        F = start + X - min(X) so the path stays positive.
    """
    if model not in SYNTH_MODELS:
        raise SeriesError(f"unknown synth model {model!r}; expected one of {SYNTH_MODELS}")
    if length < 2:
        raise SeriesError(f"synthetic series needs length >= 2, got {length}")
    if sigma < 0 or not np.isfinite(sigma) or not np.isfinite(mu):
        raise SeriesError(f"invalid synth params mu={mu}, sigma={sigma}")
    if start <= 0:
        raise SeriesError(f"start price must be positive, got {start}")

    rng = make_rng(seed)
    z = rng.standard_normal(length - 1)
    if model == "gbm":
        log_path = np.concatenate(([0.0], np.cumsum(mu + sigma * z)))
        values = start * np.exp(log_path)
    else:
        walk = np.concatenate(([0.0], np.cumsum(mu + sigma * z)))
        values = start + walk - walk.min()
    return IndexSeries(values, None, f"{model}-seed{seed}")


# ---------------------------------------------------------------------------
# Yahoo Finance
# ---------------------------------------------------------------------------

def fetch_series(
    ticker: str,
    path: Union[str, Path],
    start: Optional[str] = None,
    end: Optional[str] = None,
    retries: int = 3,
) -> IndexSeries:
    """Download daily closes from Yahoo Finance and store them as Date,Close CSV."""
    import yfinance as yf

    hist = pd.DataFrame()
    last_err = None
    for attempt in range(retries):
        try:
            hist = yf.Ticker(ticker).history(start=start, end=end, interval="1d", auto_adjust=False)
            if hist is not None and not hist.empty:
                break
        except Exception as e:  # provider errors are opaque
            last_err = e
        time.sleep(0.5 * (attempt + 1))
    if hist is None or hist.empty:
        raise SeriesError(f"no price history returned for {ticker}" + (f": {last_err}" if last_err else ""))

    frame = pd.DataFrame({
        "Date": [d.strftime("%Y-%m-%d") for d in hist.index],
        "Close": hist["Close"].to_numpy(dtype=float),
    })
    frame = frame[frame["Close"] > 0]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    logger.info("✅ Saved %d %s closes to %s", len(frame), ticker.upper(), path)
    return IndexSeries(frame["Close"].to_numpy(), tuple(frame["Date"]), ticker.upper())

