"""
Quake Agent - the financial quakes engine.

Traders sit on the nodes of a network and carry an information level I_i.
A slow global drive raises every I_i; an RSI (herding) trader reaching the
threshold topples: I_k -> 0 and each neighbor receives alpha * I_k / k.
Neighbors pushed over threshold topple in turn and join the same investment,
producing one signed quake per avalanche. Random traders never exchange
information: shares addressed to them are dissipated and, when driven over
threshold, they bet alone with a coin flip.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from agents.strategy_agent import RND, RSI, Direction, StrategySpec, predict_rnd, predict_rsi
from agents.wealth_agent import INITIAL_CAPITAL, LOST, WON, CapitalLedger
from utils.data_providers import IndexSeries
from utils.errors import QuakeError, SeriesExhaustedError
from utils.networks import DEFAULT_HUB_DEGREE, Network, hubs
from utils.seeding import make_rng

logger = logging.getLogger(__name__)

SW_ALPHA = 0.84
SF_ALPHA = 0.95
DEFAULT_THRESHOLD = 1.0

PLACEMENTS = ("none", "fraction", "hubs", "count")
ON_EXHAUST = ("stop", "wrap")

LEDGER_TOLERANCE = 1e-12

_OUTCOME_NAMES = {0: "none", WON: "won", LOST: "lost"}


@dataclass(frozen=True, eq=False)
class QuakeConfig:
    series: IndexSeries
    alpha: float = SW_ALPHA
    threshold: float = DEFAULT_THRESHOLD
    placement: str = "none"
    p_rnd: float = 0.0
    hub_k_min: int = DEFAULT_HUB_DEGREE
    n_random: int = 0
    max_quakes: Optional[int] = None
    max_steps: int = 50_000_000
    on_exhaust: str = "stop"
    rsi: StrategySpec = field(default_factory=lambda: StrategySpec(RSI))
    seed: int = 0
    initial_capital: float = INITIAL_CAPITAL
    snapshot_quakes: tuple = ()
    wealth_snapshot_every: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise QuakeError(f"alpha must be in [0, 1), got {self.alpha}")
        if self.threshold <= 0:
            raise QuakeError(f"threshold must be positive, got {self.threshold}")
        if self.placement not in PLACEMENTS:
            raise QuakeError(f"unknown placement {self.placement!r}; expected one of {PLACEMENTS}")
        if not 0.0 <= self.p_rnd <= 1.0:
            raise QuakeError(f"P_RND must be in [0, 1], got {self.p_rnd}")
        if self.n_random < 0:
            raise QuakeError(f"n_random must be >= 0, got {self.n_random}")
        if self.on_exhaust not in ON_EXHAUST:
            raise QuakeError(f"on_exhaust must be one of {ON_EXHAUST}")
        if self.on_exhaust == "wrap" and self.max_quakes is None:
            raise QuakeError("wrapping over the series needs max_quakes")
        if self.max_quakes is not None and self.max_quakes < 1:
            raise QuakeError(f"max_quakes must be >= 1, got {self.max_quakes}")
        if self.rsi.kind != RSI:
            raise QuakeError("herding traders follow the RSI strategy")
        if self.first_day >= len(self.series):
            raise QuakeError(
                f"series of {len(self.series)} days shorter than the RSI warm-up of {self.first_day} days"
            )

    @property
    def first_day(self) -> int:
        """First day whose move can be predicted from history through the day before."""
        return self.rsi.warmup + 1


@dataclass(frozen=True)
class TraderState:
    node: int
    kind: str
    information: float
    capital: float
    last_outcome: str
    bets: int
    degree: int


@dataclass(frozen=True)
class Avalanche:
    """Outcome of one propagation, before it is priced against the series."""

    members: tuple
    order: tuple
    topples: int
    initiators: int
    info_total_start: float
    removed: float
    delivered: float
    dissipated: float
    rnd_dissipated: float

    @property
    def imbalance(self) -> float:
        return self.removed - (self.delivered + self.dissipated + self.rnd_dissipated)

    def topple_bound(self, alpha: float, threshold: float) -> float:
        return self.info_total_start / ((1.0 - alpha) * threshold)


@dataclass(frozen=True)
class QuakeRecord:
    ordinal: int
    day: int
    prediction: Direction
    members: tuple
    size: int
    topples: int

    @property
    def won(self) -> bool:
        return self.size > 0

    def row(self) -> dict:
        return {
            "ordinal": self.ordinal,
            "day": self.day,
            "prediction": str(self.prediction),
            "size_signed": self.size,
            "topples": self.topples,
        }


@dataclass(frozen=True, eq=False)
class QuakeSnapshot:
    ordinal: int
    day: int
    information: np.ndarray
    members: tuple
    order: tuple


@dataclass(eq=False)
class SimulationResult:
    quakes: list
    traders: list
    is_random: np.ndarray
    capital: np.ndarray
    steps: int
    rnd_bets: int
    snapshots: list = field(default_factory=list)
    wealth_snapshots: list = field(default_factory=list)
    max_imbalance: float = 0.0

    def sizes(self) -> np.ndarray:
        return np.array([q.size for q in self.quakes], dtype=int)

    @property
    def max_abs_size(self) -> int:
        return int(np.abs(self.sizes()).max()) if self.quakes else 0


def place_random_traders(net: Network, cfg: QuakeConfig, rng: np.random.Generator) -> np.ndarray:
    n = net.n_nodes
    is_random = np.zeros(n, dtype=bool)
    if cfg.placement == "fraction":
        count = int(round(cfg.p_rnd * n))
        is_random[rng.choice(n, size=count, replace=False)] = True
    elif cfg.placement == "hubs":
        is_random[hubs(net, cfg.hub_k_min)] = True
    elif cfg.placement == "count":
        if cfg.n_random > n:
            raise QuakeError(f"n_random={cfg.n_random} exceeds network size {n}")
        is_random[rng.choice(n, size=cfg.n_random, replace=False)] = True
    return is_random


def propagate_avalanche(
    info: np.ndarray,
    is_random: np.ndarray,
    neighbors,
    alpha: float,
    threshold: float = DEFAULT_THRESHOLD,
) -> Avalanche:
    """Relax every herding trader at or above threshold, FIFO, mutating `info`.

    Toppling k: I_k -> 0 and each neighbor gets alpha * I_k / deg(k). Random
    neighbors absorb nothing (their share is dissipated). A trader re-enters
    the queue each time it crosses the threshold again; it is counted once.
    """
    initiators = [int(i) for i in np.flatnonzero(info >= threshold) if not is_random[i]]
    if not initiators:
        raise QuakeError("no herding trader at or above threshold")

    info_total_start = float(info.sum())
    queue = deque(initiators)
    in_queue = np.zeros(len(info), dtype=bool)
    in_queue[initiators] = True
    seen = set()
    order = []
    topples = 0
    removed = delivered = dissipated = rnd_dissipated = 0.0

    while queue:
        k = queue.popleft()
        in_queue[k] = False
        amount = float(info[k])
        info[k] = 0.0
        topples += 1
        removed += amount
        if k not in seen:
            seen.add(k)
            order.append(k)

        nbrs = neighbors[k]
        if not nbrs:
            dissipated += amount
            continue
        share = alpha * amount / len(nbrs)
        dissipated += (1.0 - alpha) * amount
        for nb in nbrs:
            if is_random[nb]:
                rnd_dissipated += share
                continue
            info[nb] += share
            delivered += share
            if not in_queue[nb] and info[nb] >= threshold:
                in_queue[nb] = True
                queue.append(nb)

    return Avalanche(
        members=tuple(sorted(order)),
        order=tuple(order),
        topples=topples,
        initiators=len(initiators),
        info_total_start=info_total_start,
        removed=removed,
        delivered=delivered,
        dissipated=dissipated,
        rnd_dissipated=rnd_dissipated,
    )


def realized_win(prediction: Direction, series: IndexSeries, day: int) -> bool:
    """Did `prediction` match sign(F_day - F_{day-1})? Flat days lose."""
    move = series.values[day] - series.values[day - 1]
    return (move > 0 and prediction is Direction.UP) or (move < 0 and prediction is Direction.DOWN)


def resolve_quake(
    avalanche: Avalanche,
    series: IndexSeries,
    day: int,
    spec: Optional[StrategySpec] = None,
    ordinal: int = 0,
    prediction: Optional[Direction] = None,
) -> QuakeRecord:
    """Price an avalanche against day `day`.

    The shared prediction is the RSI call made with history through day-1
    unless `prediction` is given.
    """
    if day < 1 or day >= len(series):
        raise SeriesExhaustedError(f"day {day} outside series of {len(series)} days")
    if prediction is None:
        prediction = predict_rsi(series, day - 1, spec or StrategySpec(RSI))
    n = len(avalanche.members)
    size = n if realized_win(prediction, series, day) else -n
    return QuakeRecord(ordinal, day, prediction, avalanche.members, size, avalanche.topples)


class QuakeEngine:
    """One simulation run: a network, its traders and their capital."""

    def __init__(self, net: Network, cfg: QuakeConfig):
        self.net = net
        self.cfg = cfg
        self.series = cfg.series
        self.rng = make_rng(cfg.seed)
        self.neighbors = net.neighbors
        self.is_random = place_random_traders(net, cfg, self.rng)
        self.info = np.zeros(net.n_nodes)
        self.ledger = CapitalLedger(net.n_nodes, cfg.initial_capital)
        self.day = cfg.first_day - 1
        self.quakes = []
        self.snapshots = []
        self.wealth_snapshots = []
        self.rnd_bets = 0
        self.steps = 0
        self.max_imbalance = 0.0

    # ── information dynamics ───────────────────────────────────────────
    def init_information(self) -> np.ndarray:
        """Uniform in (0, I_th), independently per trader."""
        low = np.nextafter(0.0, 1.0)
        self.info = self.rng.uniform(low, self.cfg.threshold, size=self.net.n_nodes)
        return self.info

    def drive(self) -> np.ndarray:
        """Add dI_i ~ U[0, I_th - I_max] to every trader; one time step.

        With a trader already at threshold the interval is empty and nothing moves.
        """
        width = max(self.cfg.threshold - float(self.info.max()), 0.0)
        self.info += self.rng.random(self.net.n_nodes) * width
        self.steps += 1
        return self.info

    def propagate(self) -> Avalanche:
        avalanche = propagate_avalanche(
            self.info, self.is_random, self.neighbors, self.cfg.alpha, self.cfg.threshold
        )
        scale = max(1.0, avalanche.removed)
        if abs(avalanche.imbalance) > LEDGER_TOLERANCE * scale:
            raise QuakeError(f"information ledger off by {avalanche.imbalance:.3e}")
        if avalanche.topples > avalanche.topple_bound(self.cfg.alpha, self.cfg.threshold) + 1e-9:
            raise QuakeError(f"{avalanche.topples} topples exceed the dissipation bound")
        self.max_imbalance = max(self.max_imbalance, abs(avalanche.imbalance))
        return avalanche

    # ── series bookkeeping ─────────────────────────────────────────────
    def _next_day(self) -> Optional[int]:
        day = self.day + 1
        if day >= len(self.series):
            if self.cfg.on_exhaust == "stop":
                return None
            day = self.cfg.first_day
        self.day = day
        return day

    def _random_bets(self, agents: np.ndarray) -> None:
        day = max(self.day, self.cfg.first_day)
        winners, losers = [], []
        for a in agents:
            call = predict_rnd(self.rng)
            (winners if realized_win(call, self.series, day) else losers).append(int(a))
        self.ledger.settle(winners, True)
        self.ledger.settle(losers, False)
        self.info[agents] = 0.0
        self.rnd_bets += len(agents)

    # ── main loop ──────────────────────────────────────────────────────
    def run(self) -> SimulationResult:
        cfg = self.cfg
        th = cfg.threshold
        snapshot_set = set(cfg.snapshot_quakes)
        self.init_information()

        while (cfg.max_quakes is None or len(self.quakes) < cfg.max_quakes) and self.steps < cfg.max_steps:
            self.drive()
            active = self.info >= th
            if not active.any():
                continue

            rnd_active = np.flatnonzero(active & self.is_random)
            if rnd_active.size:
                self._random_bets(rnd_active)
            if not (active & ~self.is_random).any():
                continue

            day = self._next_day()
            if day is None:
                logger.info("series exhausted after %d quakes", len(self.quakes))
                break
            ordinal = len(self.quakes)
            before = self.info.copy() if ordinal in snapshot_set else None

            avalanche = self.propagate()
            record = resolve_quake(avalanche, self.series, day, cfg.rsi, ordinal)
            self.ledger.settle(list(record.members), record.won)
            self.quakes.append(record)

            if before is not None:
                self.snapshots.append(QuakeSnapshot(ordinal, day, before, avalanche.members, avalanche.order))
            if cfg.wealth_snapshot_every and len(self.quakes) % cfg.wealth_snapshot_every == 0:
                self.wealth_snapshots.append((len(self.quakes), self.ledger.snapshot()))

        if self.steps >= cfg.max_steps:
            logger.warning("⚠️ step budget of %d exhausted after %d quakes", cfg.max_steps, len(self.quakes))
        return self.result()

    def traders(self) -> list:
        degrees = self.net.degrees
        return [
            TraderState(
                node=i,
                kind=RND if self.is_random[i] else RSI,
                information=float(self.info[i]),
                capital=float(self.ledger.capital[i]),
                last_outcome=_OUTCOME_NAMES[int(self.ledger.last_outcome[i])],
                bets=int(self.ledger.bets[i]),
                degree=int(degrees[i]),
            )
            for i in range(self.net.n_nodes)
        ]

    def result(self) -> SimulationResult:
        return SimulationResult(
            quakes=list(self.quakes),
            traders=self.traders(),
            is_random=self.is_random.copy(),
            capital=self.ledger.snapshot(),
            steps=self.steps,
            rnd_bets=self.rnd_bets,
            snapshots=list(self.snapshots),
            wealth_snapshots=list(self.wealth_snapshots),
            max_imbalance=self.max_imbalance,
        )


def run_simulation(net: Network, cfg: QuakeConfig) -> SimulationResult:
    """Drive, avalanche, resolve and settle until max_quakes or the series ends."""
    engine = QuakeEngine(net, cfg)
    result = engine.run()
    logger.info(
        "✅ %s run seed=%d: %d quakes, max |s|=%d, %d random bets, %d steps",
        net.topology, cfg.seed, len(result.quakes), result.max_abs_size, result.rnd_bets, result.steps,
    )
    return result
