"""
Trader networks: a rewired open-boundary 2D small-world lattice and a
preferential-attachment scale-free graph, plus hub selection and export.

Graphs are stored as frozen networkx graphs with integer node ids 0..N-1 in
generation order (row-major on the lattice).
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import networkx as nx
import numpy as np

from utils.errors import NetworkError
from utils.seeding import make_rng

logger = logging.getLogger(__name__)

SMALL_WORLD = "SW2D"
SCALE_FREE = "ScaleFree"

DEFAULT_LATTICE_SIDE = 40
DEFAULT_REWIRING = 0.02
DEFAULT_ATTACHMENT = 2
DEFAULT_HUB_DEGREE = 50

_MAX_REWIRE_DRAWS = 1000


@dataclass(frozen=True, eq=False)
class Network:
    graph: nx.Graph
    topology: str
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None

    @property
    def n_nodes(self) -> int:
        return self.graph.number_of_nodes()

    @property
    def n_edges(self) -> int:
        return self.graph.number_of_edges()

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.array([self.graph.degree(v) for v in range(self.n_nodes)], dtype=int)
        deg.setflags(write=False)
        return deg

    @cached_property
    def neighbors(self) -> tuple:
        """Sorted neighbor ids per node, indexed by node id."""
        return tuple(tuple(sorted(self.graph.adj[v])) for v in range(self.n_nodes))

    @property
    def mean_degree(self) -> float:
        return 2.0 * self.n_edges / self.n_nodes

    def metadata(self) -> dict:
        return {
            "topology": self.topology,
            "params": dict(self.params),
            "seed": self.seed,
            "n_nodes": self.n_nodes,
            "n_edges": self.n_edges,
            "mean_degree": self.mean_degree,
            "degree_histogram": nx.degree_histogram(self.graph),
        }


def _freeze(graph: nx.Graph, topology: str, params: dict, seed) -> Network:
    return Network(nx.freeze(graph), topology, params, seed)


def build_small_world(L: int = DEFAULT_LATTICE_SIDE, p: float = DEFAULT_REWIRING, seed: int = 0) -> Network:
    """Open-boundary L x L lattice with each edge rewired with probability p.

    A rewired edge keeps one uniformly chosen endpoint and reattaches the other
    to a uniform node that is neither that endpoint nor already its neighbor,
    so the edge count (and the mean degree) is unchanged.
    """
    if L < 2:
        raise NetworkError(f"lattice side must be >= 2, got {L}")
    if not 0.0 <= p <= 1.0:
        raise NetworkError(f"rewiring probability must be in [0, 1], got {p}")

    lattice = nx.grid_2d_graph(L, L)
    graph = nx.convert_node_labels_to_integers(lattice, ordering="sorted")
    graph = nx.Graph(graph)
    n = graph.number_of_nodes()
    rng = make_rng(seed)

    rewired = 0
    for u, v in sorted((min(a, b), max(a, b)) for a, b in graph.edges()):
        if rng.random() >= p:
            continue
        anchor = u if rng.integers(2) == 0 else v
        if graph.degree(anchor) >= n - 1:
            continue
        for _ in range(_MAX_REWIRE_DRAWS):
            target = int(rng.integers(n))
            if target != anchor and not graph.has_edge(anchor, target):
                break
        else:
            continue
        graph.remove_edge(u, v)
        graph.add_edge(anchor, target)
        rewired += 1

    logger.debug("small world L=%d p=%.3f: %d edges rewired", L, p, rewired)
    return _freeze(graph, SMALL_WORLD, {"L": L, "p": p, "rewired": rewired}, seed)


def build_scale_free(N: int = DEFAULT_LATTICE_SIDE ** 2, m: int = DEFAULT_ATTACHMENT, seed: int = 0) -> Network:
    """Preferential attachment grown from an (m+1)-clique.

    Each new node links to m distinct existing nodes drawn with probability
    proportional to degree (without replacement within one arrival).
    """
    if m < 1 or N <= m + 1:
        raise NetworkError(f"scale-free network needs N > m + 1 >= 2, got N={N}, m={m}")

    graph = nx.complete_graph(m + 1)
    # every node appears once per incident edge endpoint
    pool = [v for v in range(m + 1) for _ in range(m)]
    rng = make_rng(seed)

    for new in range(m + 1, N):
        targets = set()
        while len(targets) < m:
            targets.add(pool[int(rng.integers(len(pool)))])
        chosen = sorted(targets)
        graph.add_edges_from((new, t) for t in chosen)
        pool.extend(chosen)
        pool.extend([new] * m)

    return _freeze(graph, SCALE_FREE, {"N": N, "m": m}, seed)


def hubs(net: Network, k_min: int = DEFAULT_HUB_DEGREE) -> list:
    """Nodes with degree > k_min, highest degree first (ties by node id)."""
    deg = net.degrees
    return sorted((int(v) for v in np.flatnonzero(deg > k_min)), key=lambda v: (-deg[v], v))


def edge_rows(net: Network) -> list:
    return sorted((min(u, v), max(u, v)) for u, v in net.graph.edges())
