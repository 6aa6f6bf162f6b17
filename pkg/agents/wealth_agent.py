"""
Wealth Agent - capital ledger with the asymmetric staking rule and the
final-wealth statistics.

Staking rule for every agent:
  - the first bet does not change capital;
  - after a win the next stake is half of the current capital;
  - after a loss the next stake is ten percent of the current capital.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

logger = logging.getLogger(__name__)

INITIAL_CAPITAL = 1000.0
WIN_STAKE = 0.5
LOSS_STAKE = 0.1
RICH_THRESHOLD = 10000.0
# below one credit an agent has, for display purposes, lost everything
RUIN_THRESHOLD = 1.0

NO_BET = 0
WON = 1
LOST = -1


class CapitalLedger:
    """Per-agent capital, bet count and last outcome for one run."""

    def __init__(self, n_agents: int, initial_capital: float = INITIAL_CAPITAL, record_stakes: bool = False):
        if initial_capital <= 0:
            raise ValueError(f"initial capital must be positive, got {initial_capital}")
        self.initial_capital = float(initial_capital)
        self.capital = np.full(n_agents, self.initial_capital)
        self.bets = np.zeros(n_agents, dtype=np.int64)
        self.last_outcome = np.zeros(n_agents, dtype=np.int8)
        self.stake_history: Optional[list] = [] if record_stakes else None

    def __len__(self) -> int:
        return len(self.capital)

    def stake(self, agents) -> np.ndarray:
        """Stake dC for the next bet of each agent (array in, array out)."""
        agents = np.atleast_1d(np.asarray(agents, dtype=np.int64))
        last = self.last_outcome[agents]
        rate = np.where(last == WON, WIN_STAKE, np.where(last == LOST, LOSS_STAKE, 0.0))
        return rate * self.capital[agents]

    def settle(self, agents, won: bool) -> np.ndarray:
        """Apply one shared outcome to every listed agent; returns the stakes used."""
        agents = np.atleast_1d(np.asarray(agents, dtype=np.int64))
        if agents.size == 0:
            return np.zeros(0)
        stakes = self.stake(agents)
        if self.stake_history is not None:
            self.stake_history.extend(
                (int(a), float(c), int(o), float(s))
                for a, c, o, s in zip(agents, self.capital[agents], self.last_outcome[agents], stakes)
            )
        self.capital[agents] += stakes if won else -stakes
        self.last_outcome[agents] = WON if won else LOST
        self.bets[agents] += 1
        return stakes

    def snapshot(self) -> np.ndarray:
        return self.capital.copy()


@dataclass(frozen=True)
class WealthStats:
    count: int
    mean: float
    minimum: float
    maximum: float
    fraction_below_initial: float
    fraction_above_rich: float
    fraction_ruined: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _stats(capital: np.ndarray, initial: float) -> Optional[WealthStats]:
    if capital.size == 0:
        return None
    return WealthStats(
        count=int(capital.size),
        mean=float(capital.mean()),
        minimum=float(capital.min()),
        maximum=float(capital.max()),
        fraction_below_initial=float(np.mean(capital < initial)),
        fraction_above_rich=float(np.mean(capital > RICH_THRESHOLD)),
        fraction_ruined=float(np.mean(capital < RUIN_THRESHOLD)),
    )


def wealth_summary(capital, is_random, initial_capital: float = INITIAL_CAPITAL) -> dict:
    """Final-wealth statistics for all traders and for random traders only.

    `capital` and `is_random` may be cumulated over several runs.
    """
    capital = np.asarray(capital, dtype=float)
    is_random = np.asarray(is_random, dtype=bool)
    rnd = capital[is_random]
    herd = capital[~is_random]
    summary = {
        "all": _stats(capital, initial_capital).to_dict() if capital.size else None,
        "rnd": _stats(rnd, initial_capital).to_dict() if rnd.size else None,
        "herding": _stats(herd, initial_capital).to_dict() if herd.size else None,
    }
    if rnd.size and herd.size:
        summary["herding_below_worst_rnd"] = float(np.mean(herd < rnd.min()))
    return summary


class WealthAgent:
    """Final-wealth reports over one or more runs' capital vectors."""

    def __init__(self, initial_capital: float = INITIAL_CAPITAL):
        self.initial_capital = float(initial_capital)

    def ledger(self, n_agents: int, record_stakes: bool = False) -> CapitalLedger:
        return CapitalLedger(n_agents, self.initial_capital, record_stakes)

    def summary(self, capital, is_random) -> dict:
        return wealth_summary(capital, is_random, self.initial_capital)
