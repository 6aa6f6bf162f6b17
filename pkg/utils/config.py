"""
Experiment configuration: one flat dataclass holding every module parameter,
filled from built-in defaults, a key=value config file and command-line flags
(in that order of precedence). Environment defaults come from `.env`.
"""

import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Union

from dotenv import dotenv_values, load_dotenv

from utils.errors import ConfigError

logger = logging.getLogger(__name__)

load_dotenv()

DEFAULT_OUTPUT_DIR = "./output"
NETWORKS = ("sw", "sf")
SW_DEFAULT_ALPHA = 0.84
SF_DEFAULT_ALPHA = 0.95


def env_output_dir() -> str:
    return os.getenv("FINQUAKE_OUTPUT_DIR") or DEFAULT_OUTPUT_DIR


def env_workers() -> int:
    raw = os.getenv("FINQUAKE_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"FINQUAKE_WORKERS must be an integer, got {raw!r}") from None


def env_log_level() -> str:
    return os.getenv("FINQUAKE_LOG_LEVEL", "INFO").upper()


@dataclass(frozen=True)
class ExperimentConfig:
    # ── I/O and run control ────────────────────────────────────────────
    input: Optional[str] = None
    column: Optional[str] = None
    output_dir: str = field(default_factory=env_output_dir)
    seed: int = 42
    runs: int = 10
    workers: int = field(default_factory=env_workers)
    resume: bool = False

    # ── strategies and backtest ────────────────────────────────────────
    strategies: str = "rnd,mom,rsi"
    mom_lag: int = 7
    rsi_period: int = 14
    windows: tuple = (3, 9, 18, 30)

    # ── DMA ────────────────────────────────────────────────────────────
    hurst_window: int = 1000
    hurst_step: int = 20
    points_per_decade: int = 24
    prefactor: str = "terms"

    # ── network ────────────────────────────────────────────────────────
    network: str = "sw"
    lattice_side: int = 40
    rewiring: float = 0.02
    n_nodes: int = 1600
    attachment: int = 2

    # ── quake engine ───────────────────────────────────────────────────
    alpha: Optional[float] = None
    threshold: float = 1.0
    placement: str = "none"
    p_rnd: float = 0.0
    hub_k_min: int = 50
    n_random: int = 0
    quakes: int = 3000
    on_exhaust: str = "stop"
    wealth_every: int = 0

    # ── synthetic series ───────────────────────────────────────────────
    synth_model: str = "gbm"
    length: int = 5000
    mu: float = 0.0
    sigma: float = 0.01
    start_price: float = 100.0

    # ── fits ───────────────────────────────────────────────────────────
    bins_per_decade: int = 10
    x_min: Optional[float] = None

    # ── fetch ──────────────────────────────────────────────────────────
    ticker: Optional[str] = None
    start: Optional[str] = None
    end: Optional[str] = None

    @property
    def effective_alpha(self) -> float:
        if self.alpha is not None:
            return self.alpha
        return SF_DEFAULT_ALPHA if self.network == "sf" else SW_DEFAULT_ALPHA

    @property
    def network_size(self) -> int:
        return self.lattice_side ** 2 if self.network == "sw" else self.n_nodes

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
        return replace(self, **{k: _coerce(k, v) for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict:
        out = asdict(self)
        out["windows"] = list(self.windows)
        out["effective_alpha"] = self.effective_alpha
        return out

    def validate(self) -> "ExperimentConfig":
        """Check every parameter before any work starts; returns self."""
        checks = [
            (self.runs >= 1, f"runs must be >= 1, got {self.runs}"),
            (self.workers >= 1, f"workers must be >= 1, got {self.workers}"),
            (self.mom_lag >= 1, f"mom_lag must be >= 1, got {self.mom_lag}"),
            (self.rsi_period >= 1, f"rsi_period must be >= 1, got {self.rsi_period}"),
            (all(w >= 1 for w in self.windows) and self.windows, f"windows must be positive, got {self.windows}"),
            (self.hurst_window >= 8, f"hurst_window must be >= 8, got {self.hurst_window}"),
            (self.hurst_step >= 1, f"hurst_step must be >= 1, got {self.hurst_step}"),
            (self.points_per_decade >= 1, f"points_per_decade must be >= 1, got {self.points_per_decade}"),
            (self.prefactor in ("terms", "reduced"), f"prefactor must be 'terms' or 'reduced', got {self.prefactor!r}"),
            (self.network in NETWORKS, f"network must be one of {NETWORKS}, got {self.network!r}"),
            (self.lattice_side >= 2, f"lattice_side must be >= 2, got {self.lattice_side}"),
            (0.0 <= self.rewiring <= 1.0, f"rewiring must be in [0, 1], got {self.rewiring}"),
            (self.attachment >= 1, f"attachment must be >= 1, got {self.attachment}"),
            (self.n_nodes > self.attachment + 1, f"n_nodes must exceed attachment + 1, got {self.n_nodes}"),
            (0.0 <= self.effective_alpha < 1.0, f"alpha must be in [0, 1), got {self.effective_alpha}"),
            (self.threshold > 0, f"threshold must be positive, got {self.threshold}"),
            (self.placement in ("none", "fraction", "hubs", "count"), f"unknown placement {self.placement!r}"),
            (0.0 <= self.p_rnd <= 1.0, f"p_rnd must be in [0, 1], got {self.p_rnd}"),
            (self.hub_k_min >= 0, f"hub_k_min must be >= 0, got {self.hub_k_min}"),
            (0 <= self.n_random <= self.network_size, f"n_random must be in [0, {self.network_size}], got {self.n_random}"),
            (self.quakes >= 1, f"quakes must be >= 1, got {self.quakes}"),
            (self.on_exhaust in ("stop", "wrap"), f"on_exhaust must be 'stop' or 'wrap', got {self.on_exhaust!r}"),
            (self.wealth_every >= 0, f"wealth_every must be >= 0, got {self.wealth_every}"),
            (self.synth_model in ("gbm", "iid-gaussian-walk"), f"unknown synth model {self.synth_model!r}"),
            (self.length >= 2, f"length must be >= 2, got {self.length}"),
            (self.sigma >= 0, f"sigma must be >= 0, got {self.sigma}"),
            (self.start_price > 0, f"start_price must be positive, got {self.start_price}"),
            (self.bins_per_decade >= 1, f"bins_per_decade must be >= 1, got {self.bins_per_decade}"),
            (self.x_min is None or self.x_min > 0, f"x_min must be positive, got {self.x_min}"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        return self


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}
_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, value):
    """Turn a config-file or flag value into the field's type."""
    if not isinstance(value, str):
        if key == "windows":
            return tuple(int(w) for w in value)
        return value
    text = value.strip()
    kind = str(_TYPES[key])
    try:
        if key == "windows":
            return tuple(int(w) for w in text.split(",") if w.strip())
        if kind in ("bool", "<class 'bool'>"):
            lowered = text.lower()
            if lowered in _BOOL_TRUE:
                return True
            if lowered in _BOOL_FALSE:
                return False
            raise ValueError(text)
        if text == "" and "Optional" in kind:
            return None
        if "int" in kind:
            return int(text)
        if "float" in kind:
            return float(text)
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {value!r}") from None
    return text


def read_config_file(path: Union[str, Path]) -> dict:
    """Parse a key=value file (dotenv syntax, '#' comments); keys are case-insensitive."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw = dotenv_values(path)
    return {k.strip().lower().replace("-", "_"): v for k, v in raw.items() if v is not None}


def load_config(config_file: Optional[Union[str, Path]] = None, **overrides) -> ExperimentConfig:
    """defaults < config file < overrides (flags); validated before return."""
    cfg = ExperimentConfig()
    if config_file:
        cfg = cfg.with_overrides(**read_config_file(config_file))
        logger.debug("config file %s applied", config_file)
    cfg = cfg.with_overrides(**overrides)
    if cfg.p_rnd > 0 and cfg.placement == "none":
        logger.info("p_rnd=%g given without a placement; placing random traders uniformly", cfg.p_rnd)
        cfg = replace(cfg, placement="fraction")
    return cfg.validate()
