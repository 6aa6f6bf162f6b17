"""
Orchestrator Agent - coordinates the specialist agents into experiments.

Each subcommand and each `reproduce` recipe is one method. Multi-run
experiments derive one seed per run from the master seed, run on a process
pool, store per-run record files and merge them once every run is done.
"""

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np
import pandas as pd

from agents.backtest_agent import BacktestAgent, BacktestConfig, WindowStats
from agents.quake_agent import QuakeConfig, QuakeEngine, run_simulation
from agents.strategy_agent import RND, RSI, StrategySpec, parse_strategies
from agents.wealth_agent import INITIAL_CAPITAL, WealthAgent
from utils.artifact_store import ArtifactStore
from utils.config import ExperimentConfig
from utils.data_providers import IndexSeries, fetch_series, load_series, returns, synth_series
from utils.dma import hurst_global, hurst_sliding
from utils.errors import ConfigError, FitError
from utils.fitstats import AVALANCHE_XMIN, compare_models, log_binned_histogram
from utils.networks import (
    Network,
    build_scale_free,
    build_small_world,
    edge_rows,
    hubs,
)
from utils.seeding import derive_seed

logger = logging.getLogger(__name__)

RECIPES = ("fig2", "fig3", "fig4", "fig5", "fig7", "fig8", "fig10", "fig11", "fig12", "fig13", "fig14")

FIG8_FRACTIONS = (0.0, 0.05, 0.10)
FIG12_ALPHAS = (0.84, 0.40, 0.00)
WEALTH_FRACTION = 0.10
SNAPSHOTS_PER_RUN = 10


# ---------------------------------------------------------------------------
# One simulation run (picklable, executed in worker processes)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunSpec:
    """Everything that determines one run's records, besides the series itself."""

    tag: str
    run: int
    seed: int
    network: str
    lattice_side: int
    rewiring: float
    n_nodes: int
    attachment: int
    alpha: float
    threshold: float
    placement: str
    p_rnd: float
    hub_k_min: int
    n_random: int
    quakes: int
    on_exhaust: str
    rsi_period: int
    wealth_every: int
    series_digest: str

    @property
    def network_seed(self) -> int:
        return derive_seed(self.seed, 0)

    @property
    def simulation_seed(self) -> int:
        return derive_seed(self.seed, 1)

    def to_dict(self) -> dict:
        return asdict(self)


def series_digest(series: IndexSeries) -> str:
    return hashlib.sha256(np.ascontiguousarray(series.values).tobytes()).hexdigest()[:16]


def build_network(spec: RunSpec) -> Network:
    if spec.network == "sw":
        return build_small_world(spec.lattice_side, spec.rewiring, spec.network_seed)
    return build_scale_free(spec.n_nodes, spec.attachment, spec.network_seed)


def quake_config(spec: RunSpec, series: IndexSeries, **extra) -> QuakeConfig:
    return QuakeConfig(
        series=series,
        alpha=spec.alpha,
        threshold=spec.threshold,
        placement=spec.placement,
        p_rnd=spec.p_rnd,
        hub_k_min=spec.hub_k_min,
        n_random=spec.n_random,
        max_quakes=spec.quakes,
        on_exhaust=spec.on_exhaust,
        rsi=StrategySpec(RSI, rsi_lookback=spec.rsi_period, rsi_trend=spec.rsi_period),
        seed=spec.simulation_seed,
        wealth_snapshot_every=spec.wealth_every,
        **extra,
    )


def simulate_run(spec: RunSpec, series: IndexSeries) -> dict:
    """Run one seeded simulation and return its record frames."""
    net = build_network(spec)
    result = run_simulation(net, quake_config(spec, series))
    frames = {
        "quakes": pd.DataFrame(
            [q.row() for q in result.quakes],
            columns=["ordinal", "day", "prediction", "size_signed", "topples"],
        ),
        "wealth": pd.DataFrame({
            "agent": np.arange(net.n_nodes),
            "kind": [t.kind for t in result.traders],
            "degree": net.degrees,
            "capital": result.capital,
            "bets": [t.bets for t in result.traders],
        }),
    }
    if spec.wealth_every:
        frames["capital"] = pd.DataFrame(
            [(after, agent, float(c)) for after, snap in result.wealth_snapshots for agent, c in enumerate(snap)],
            columns=["after_quakes", "agent", "capital"],
        )
    return frames


def _simulate_packed(args) -> dict:
    return simulate_run(*args)


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------

def _comparison(values: np.ndarray, x_min: Optional[float]) -> dict:
    try:
        return compare_models(values, x_min).to_dict()
    except FitError as e:
        return {"error": str(e)}


def histogram_frame(values: np.ndarray, bins_per_decade: int) -> pd.DataFrame:
    values = values[values > 0]
    if values.size == 0:
        return pd.DataFrame(columns=["bin_center", "density"])
    hist = log_binned_histogram(values, bins_per_decade)
    return pd.DataFrame({"bin_center": hist.centers, "density": hist.density})


def _abs_sizes(frames: list) -> np.ndarray:
    if not frames:
        return np.zeros(0)
    return np.concatenate([f["size_signed"].abs().to_numpy(dtype=float) for f in frames])


def size_summary(quake_frames: list, n_nodes: int, x_min: Optional[float] = None) -> dict:
    """Cumulated |s_j| statistics over runs."""
    per_run = [int(f["size_signed"].abs().max()) if len(f) else 0 for f in quake_frames]
    sizes = _abs_sizes(quake_frames)
    top = max(per_run) if per_run else 0
    return {
        "quakes": int(sizes.size),
        "max_abs_size": top,
        "max_fraction": top / n_nodes,
        "per_run_max": per_run,
        "runs_max_above_10pct": sum(m >= 0.10 * n_nodes for m in per_run),
        "runs_max_below_5pct": sum(m < 0.05 * n_nodes for m in per_run),
        "fit": _comparison(sizes, AVALANCHE_XMIN if x_min is None else x_min) if sizes.size else None,
    }


def wealth_report(wealth: pd.DataFrame, x_min: Optional[float] = None) -> dict:
    capital = wealth["capital"].to_numpy(dtype=float)
    is_random = (wealth["kind"] == RND).to_numpy()
    out = WealthAgent().summary(capital, is_random)
    out["tail_fit"] = _comparison(capital, INITIAL_CAPITAL if x_min is None else x_min)
    return out


# ---------------------------------------------------------------------------
# Orchestrator
# ---------------------------------------------------------------------------

class Orchestrator:
    """Central coordinator: one method per subcommand and per recipe."""

    def __init__(self, cfg: ExperimentConfig, store: Optional[ArtifactStore] = None):
        self.cfg = cfg
        self.store = store or ArtifactStore(cfg.output_dir, cfg.to_dict(), cfg.seed)
        self._series: Optional[IndexSeries] = None

    # ── inputs ─────────────────────────────────────────────────────────
    def _alpha(self, default: float) -> float:
        """Recipe alpha: an explicit --alpha wins over the topology default."""
        return default if self.cfg.alpha is None else self.cfg.alpha

    def series(self) -> IndexSeries:
        if self._series is None:
            cfg = self.cfg
            if cfg.input:
                self._series = load_series(cfg.input, cfg.column)
            else:
                self.store.warn(
                    f"no --input given; using synthetic {cfg.synth_model} series "
                    f"(T={cfg.length}, sigma={cfg.sigma}, seed={cfg.seed})"
                )
                self._series = synth_series(cfg.synth_model, cfg.length, cfg.mu, cfg.sigma, cfg.start_price, cfg.seed)
        return self._series

    def run_spec(self, tag: str, **overrides) -> RunSpec:
        cfg = self.cfg
        base = RunSpec(
            tag=tag,
            run=0,
            seed=derive_seed(cfg.seed, 0),
            network=cfg.network,
            lattice_side=cfg.lattice_side,
            rewiring=cfg.rewiring,
            n_nodes=cfg.n_nodes,
            attachment=cfg.attachment,
            alpha=cfg.effective_alpha,
            threshold=cfg.threshold,
            placement=cfg.placement,
            p_rnd=cfg.p_rnd,
            hub_k_min=cfg.hub_k_min,
            n_random=cfg.n_random,
            quakes=cfg.quakes,
            on_exhaust=cfg.on_exhaust,
            rsi_period=cfg.rsi_period,
            wealth_every=cfg.wealth_every,
            series_digest=series_digest(self.series()),
        )
        return replace(base, **overrides)

    # ── ensembles ──────────────────────────────────────────────────────
    def run_ensemble(self, template: RunSpec, runs: Optional[int] = None, per_run: Optional[dict] = None) -> list:
        """Run `runs` seeded copies of `template`; returns their frame dicts in run order.

        `per_run` maps a run index to extra field overrides for that run.
        """
        runs = self.cfg.runs if runs is None else runs
        series = self.series()
        specs = [
            replace(template, run=r, seed=derive_seed(self.cfg.seed, r), **(per_run or {}).get(r, {}))
            for r in range(runs)
        ]
        kinds = ("quakes", "wealth", "capital") if template.wealth_every else ("quakes", "wealth")

        results = {}
        if self.cfg.resume:
            for spec in specs:
                frames = self.store.load_run(spec.tag, spec.run, kinds, spec.to_dict())
                if frames is not None:
                    results[spec.run] = frames
        todo = [s for s in specs if s.run not in results]

        if todo:
            logger.info("🚀 %s: %d run(s) on %d worker(s)", template.tag, len(todo), self.cfg.workers)
            if self.cfg.workers > 1 and len(todo) > 1:
                with ProcessPoolExecutor(max_workers=self.cfg.workers) as pool:
                    computed = list(pool.map(_simulate_packed, [(s, series) for s in todo]))
            else:
                computed = [simulate_run(s, series) for s in todo]
            for spec, frames in zip(todo, computed):
                self.store.save_run(spec.tag, spec.run, frames, spec.to_dict())
                results[spec.run] = frames
        return [results[s.run] for s in specs]

    def _write_ensemble(self, tag: str, ensemble: list, n_nodes: int, wealth: bool = False) -> dict:
        quakes = [e["quakes"] for e in ensemble]
        self.store.write_csv(f"{tag}_quakes.csv", self.store.merge_runs(quakes))
        self.store.write_csv(f"{tag}_sizes_hist.csv", histogram_frame(_abs_sizes(quakes), self.cfg.bins_per_decade))
        summary = {"sizes": size_summary(quakes, n_nodes, self.cfg.x_min)}
        if wealth:
            merged = self.store.merge_runs([e["wealth"] for e in ensemble])
            self.store.write_csv(f"{tag}_wealth.csv", merged)
            capital = merged["capital"].to_numpy(dtype=float)
            self.store.write_csv(f"{tag}_wealth_hist.csv", histogram_frame(capital, self.cfg.bins_per_decade))
            rnd = merged.loc[merged["kind"] == RND, "capital"].to_numpy(dtype=float)
            if rnd.size:
                self.store.write_csv(f"{tag}_wealth_rnd_hist.csv", histogram_frame(rnd, self.cfg.bins_per_decade))
            summary["wealth"] = wealth_report(merged)
        return summary

    def _finish(self, name: str, summary: dict) -> dict:
        summary = {"command": name, **summary, "warnings": list(self.store.warnings)}
        self.store.write_json(f"{name}_summary.json", summary)
        summary["outputs"] = list(self.store.written)
        return summary

    # ── subcommands ────────────────────────────────────────────────────
    def analyze(self, name: str = "analyze") -> dict:
        cfg = self.cfg
        series = self.series()
        r = returns(series).values
        self.store.write_csv("returns.csv", pd.DataFrame({"index": np.arange(len(r)), "value": r}))

        profile = hurst_global(series, cfg.points_per_decade, cfg.prefactor)
        self.store.write_csv("dma_curve.csv", pd.DataFrame({"n": profile.n, "sigma": profile.sigma}))
        summary = {"series": series.label, "T": len(series), "global": profile.to_dict()}

        if cfg.hurst_window <= len(series):
            sliding = hurst_sliding(
                series, cfg.hurst_window, cfg.hurst_step, cfg.points_per_decade, cfg.prefactor, cfg.workers
            )
            self.store.write_csv("hurst_sliding.csv", pd.DataFrame({"j": sliding.days, "H": sliding.hurst}))
            summary["sliding"] = {
                "window": sliding.window,
                "step": sliding.step,
                "count": int(len(sliding.hurst)),
                "min": float(sliding.hurst.min()),
                "max": float(sliding.hurst.max()),
                "excursions_outside_0.45_0.55": int(np.sum((sliding.hurst < 0.45) | (sliding.hurst > 0.55))),
            }
        else:
            self.store.warn(f"series of {len(series)} days shorter than the sliding window {cfg.hurst_window}; skipped")
        logger.info("📈 %s: global H = %.3f", series.label, profile.hurst)
        return self._finish(name, summary)

    def _backtest_windows(self, windows: tuple) -> dict:
        cfg = self.cfg
        series = self.series()
        strategies = parse_strategies(cfg.strategies, cfg.mom_lag, cfg.rsi_period)
        summary, rows = {}, []
        for n_windows in windows:
            agent = BacktestAgent(BacktestConfig(n_windows, cfg.runs, strategies, cfg.seed, cfg.workers))
            stats = agent.run(series)
            self.store.write_csv(f"backtest_nw{n_windows}.csv", self._window_frame(stats))
            summary[str(n_windows)] = stats.summary()
            row = {"n_windows": n_windows, "window_size": stats.window_size}
            for kind in stats.kinds:
                row[f"{kind.lower()}_mean"] = stats.mean_win[kind]
                row[f"{kind.lower()}_std"] = stats.std_win[kind]
            rows.append(row)
        self.store.write_csv("backtest_summary.csv", pd.DataFrame(rows))
        return summary

    @staticmethod
    def _window_frame(stats: WindowStats) -> pd.DataFrame:
        frame = pd.DataFrame({"window": np.arange(stats.n_windows), "vol": stats.volatility})
        for kind in stats.kinds:
            frame[f"{kind.lower()}_win"] = stats.window_win[kind]
        return frame

    def backtest(self, name: str = "backtest") -> dict:
        return self._finish(name, {"series": self.series().label, "windows": self._backtest_windows(self.cfg.windows)})

    def simulate(self, name: str = "simulate") -> dict:
        template = self.run_spec("simulate")
        ensemble = self.run_ensemble(template)
        net = build_network(template)
        self._write_network(net, "network")
        if template.wealth_every:
            self.store.write_csv("simulate_capital_evolution.csv", self.store.merge_runs([e["capital"] for e in ensemble]))
        summary = self._write_ensemble("simulate", ensemble, net.n_nodes, wealth=True)
        summary["network"] = {k: v for k, v in net.metadata().items() if k != "degree_histogram"}
        summary["random_traders_per_run"] = [int((e["wealth"]["kind"] == RND).sum()) for e in ensemble]
        return self._finish(name, summary)

    def fit(self, name: str = "fit") -> dict:
        cfg = self.cfg
        if not cfg.input:
            raise ConfigError("fit needs --input with the values to fit")
        frame = pd.read_csv(cfg.input)
        column = cfg.column or next((c for c in ("size_signed", "capital") if c in frame.columns), frame.columns[-1])
        if column not in frame.columns:
            raise ConfigError(f"column {column!r} not found in {cfg.input}")
        values = np.abs(pd.to_numeric(frame[column], errors="raise").to_numpy(dtype=float))
        values = values[values > 0]
        self.store.write_csv("fit_hist.csv", histogram_frame(values, cfg.bins_per_decade))
        x_min = cfg.x_min if cfg.x_min is not None else (AVALANCHE_XMIN if column == "size_signed" else None)
        report = compare_models(values, x_min).to_dict()
        self.store.write_json("fit_report.json", report)
        return self._finish(name, {"column": column, "n": int(values.size), "fit": report})

    def synth(self, name: str = "synth") -> dict:
        cfg = self.cfg
        series = synth_series(cfg.synth_model, cfg.length, cfg.mu, cfg.sigma, cfg.start_price, cfg.seed)
        self.store.write_csv("series.csv", pd.DataFrame({"index": np.arange(len(series)), "close": series.values}))
        return self._finish(name, {"series": series.label, "T": len(series)})

    def fetch(self, name: str = "fetch") -> dict:
        cfg = self.cfg
        if not cfg.ticker:
            raise ConfigError("fetch needs --ticker")
        target = self.store.path(f"{cfg.ticker.lower()}.csv")
        series = fetch_series(cfg.ticker, target, cfg.start, cfg.end)
        self.store.written.append(str(target))
        return self._finish(name, {"ticker": cfg.ticker.upper(), "T": len(series), "path": str(target)})

    def _write_network(self, net: Network, name: str) -> None:
        self.store.write_csv(f"{name}_edges.csv", pd.DataFrame(edge_rows(net), columns=["u", "v"]))
        self.store.write_json(f"{name}.json", net.metadata())

    # ── recipes ────────────────────────────────────────────────────────
    def reproduce(self, figure: str) -> dict:
        if figure not in RECIPES:
            raise ConfigError(f"unknown recipe {figure!r}; expected one of {RECIPES}")
        return getattr(self, f"_{figure}")()

    def _fig2(self) -> dict:
        return self.analyze("fig2")

    def _backtest_recipe(self, name: str, windows: tuple) -> dict:
        return self._finish(name, {"series": self.series().label, "windows": self._backtest_windows(windows)})

    def _fig3(self) -> dict:
        return self._backtest_recipe("fig3", self.cfg.windows)

    def _fig4(self) -> dict:
        return self._backtest_recipe("fig4", self.cfg.windows)

    def _fig5(self) -> dict:
        return self._backtest_recipe("fig5", (max(self.cfg.windows),))

    def _fig7(self) -> dict:
        """Single SW run of RSI traders; snapshot of the largest quake."""
        spec = self.run_spec("fig7", network="sw", alpha=self._alpha(0.84), placement="none", p_rnd=0.0)
        frames = self.run_ensemble(spec, runs=1)[0]
        quakes = frames["quakes"]
        net = build_network(spec)
        self._write_network(net, "fig7_network")
        summary = self._write_ensemble("fig7", [frames], net.n_nodes)

        if len(quakes):
            largest = int(quakes["size_signed"].abs().idxmax())
            ordinal = int(quakes.loc[largest, "ordinal"])
            # deterministic replay up to the largest quake, this time keeping its snapshot
            replay = quake_config(replace(spec, quakes=ordinal + 1), self.series(), snapshot_quakes=(ordinal,))
            engine = QuakeEngine(net, replay)
            snap = engine.run().snapshots[0]
            order = {node: i for i, node in enumerate(snap.order)}
            side = spec.lattice_side
            self.store.write_csv("fig7_snapshot.csv", pd.DataFrame({
                "node": np.arange(net.n_nodes),
                "row": np.arange(net.n_nodes) // side,
                "col": np.arange(net.n_nodes) % side,
                "information": snap.information,
                "member": [int(v in order) for v in range(net.n_nodes)],
                "topple_order": [order.get(v, -1) for v in range(net.n_nodes)],
            }))
            summary["snapshot"] = {"ordinal": ordinal, "day": snap.day, "size": len(snap.members)}
        return self._finish("fig7", summary)

    def _fig8(self) -> dict:
        """SW sizes for increasing fractions of uniformly placed random traders."""
        summary = {}
        for p_rnd in FIG8_FRACTIONS:
            tag = f"fig8_p{p_rnd:.2f}"
            spec = self.run_spec(
                tag, network="sw", alpha=self._alpha(0.84),
                placement="fraction" if p_rnd > 0 else "none", p_rnd=p_rnd,
            )
            ensemble = self.run_ensemble(spec)
            summary[f"{p_rnd:.2f}"] = self._write_ensemble(tag, ensemble, spec.lattice_side ** 2)["sizes"]
        return self._finish("fig8", summary)

    def _fig10(self) -> dict:
        """SF sizes: RSI only, hubs as random traders, and the same count placed uniformly."""
        alpha = self._alpha(0.95)
        base = self.run_spec("fig10_rsi", network="sf", alpha=alpha, placement="none", p_rnd=0.0)
        hub_counts = {
            r: len(hubs(build_network(replace(base, seed=derive_seed(self.cfg.seed, r))), base.hub_k_min))
            for r in range(self.cfg.runs)
        }
        variants = {
            "rsi": (base, None),
            "hubs": (replace(base, tag="fig10_hubs", placement="hubs"), None),
            "count": (
                replace(base, tag="fig10_count", placement="count"),
                {r: {"n_random": k} for r, k in hub_counts.items()},
            ),
        }
        summary = {"hubs_per_run": list(hub_counts.values())}
        for name, (spec, per_run) in variants.items():
            ensemble = self.run_ensemble(spec, per_run=per_run)
            summary[name] = self._write_ensemble(spec.tag, ensemble, spec.n_nodes)["sizes"]
        rsi_max = summary["rsi"]["max_abs_size"]
        if rsi_max:
            summary["hub_reduction"] = 1.0 - summary["hubs"]["max_abs_size"] / rsi_max
        return self._finish("fig10", summary)

    def _capital_evolution(self, tag: str, alpha: float, runs: Optional[int] = None) -> dict:
        every = max(1, self.cfg.quakes // SNAPSHOTS_PER_RUN)
        spec = self.run_spec(tag, network="sw", alpha=alpha, placement="none", p_rnd=0.0, wealth_every=every)
        ensemble = self.run_ensemble(spec, runs=runs)
        self.store.write_csv(f"{tag}_capital_evolution.csv", ensemble[0]["capital"])
        return self._write_ensemble(tag, ensemble, spec.lattice_side ** 2, wealth=True)

    def _fig11(self) -> dict:
        """Capital distribution over time for a single SW run of RSI traders."""
        return self._finish("fig11", self._capital_evolution("fig11", self._alpha(0.84), runs=1))

    def _fig12(self) -> dict:
        """The same evolution while the information flow alpha is lowered."""
        summary = {f"{a:.2f}": self._capital_evolution(f"fig12_a{a:.2f}", a) for a in FIG12_ALPHAS}
        maxima = [summary[f"{a:.2f}"]["sizes"]["max_abs_size"] for a in FIG12_ALPHAS]
        summary["max_size_non_increasing"] = all(b <= a for a, b in zip(maxima, maxima[1:]))
        return self._finish("fig12", summary)

    def _fig13(self) -> dict:
        """Final wealth on SW with 10% uniformly placed random traders, cumulated over runs."""
        spec = self.run_spec("fig13", network="sw", alpha=self._alpha(0.84),
                             placement="fraction", p_rnd=WEALTH_FRACTION)
        ensemble = self.run_ensemble(spec)
        return self._finish("fig13", self._write_ensemble("fig13", ensemble, spec.lattice_side ** 2, wealth=True))

    def _fig14(self) -> dict:
        """Final wealth on SF with the hubs trading at random, cumulated over runs."""
        spec = self.run_spec("fig14", network="sf", alpha=self._alpha(0.95), placement="hubs", p_rnd=0.0)
        ensemble = self.run_ensemble(spec)
        summary = self._write_ensemble("fig14", ensemble, spec.n_nodes, wealth=True)
        summary["hubs_per_run"] = [int((e["wealth"]["kind"] == RND).sum()) for e in ensemble]
        return self._finish("fig14", summary)
