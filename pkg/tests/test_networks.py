import networkx as nx
import numpy as np
import pytest

from utils.errors import NetworkError
from utils.fitstats import fit_power_law
from utils.networks import SCALE_FREE, SMALL_WORLD, build_scale_free, build_small_world, edge_rows, hubs


def test_small_world_keeps_lattice_edge_count():
    net = build_small_world(40, 0.02, seed=1)
    assert net.n_nodes == 1600
    assert net.n_edges == 3120
    assert net.mean_degree == pytest.approx(3.9)
    assert net.topology == SMALL_WORLD


def test_unrewired_lattice_degrees(small_lattice):
    deg = small_lattice.degrees
    assert deg[0] == 2 and deg[9] == 2 and deg[99] == 2
    assert deg[1] == 3
    assert deg[55] == 4
    assert small_lattice.params["rewired"] == 0
    assert small_lattice.neighbors[0] == (1, 10)


def test_small_world_is_deterministic():
    a = build_small_world(20, 0.1, seed=9)
    b = build_small_world(20, 0.1, seed=9)
    c = build_small_world(20, 0.1, seed=10)
    assert edge_rows(a) == edge_rows(b)
    assert edge_rows(a) != edge_rows(c)
    assert a.params["rewired"] > 0


def test_small_world_has_no_self_loops_or_duplicates():
    net = build_small_world(15, 1.0, seed=3)
    rows = edge_rows(net)
    assert all(u != v for u, v in rows)
    assert len(rows) == len(set(rows)) == 2 * 15 * 14


def test_small_world_errors():
    with pytest.raises(NetworkError):
        build_small_world(1, 0.0)
    with pytest.raises(NetworkError):
        build_small_world(10, 1.5)


def test_scale_free_edge_counts():
    assert build_scale_free(4, 2, seed=0).n_edges == 5
    net = build_scale_free(1600, 2, seed=0)
    assert net.n_edges == 3197
    assert net.topology == SCALE_FREE
    assert net.degrees.min() >= 2


def test_scale_free_is_deterministic():
    assert edge_rows(build_scale_free(300, 2, seed=4)) == edge_rows(build_scale_free(300, 2, seed=4))


def test_scale_free_errors():
    with pytest.raises(NetworkError):
        build_scale_free(3, 2)
    with pytest.raises(NetworkError):
        build_scale_free(10, 0)


def test_hubs(small_lattice):
    assert hubs(small_lattice, 50) == []
    assert len(hubs(small_lattice, -1)) == 100
    net = build_scale_free(1600, 2, seed=2)
    top = hubs(net, 10)
    degrees = [net.degrees[v] for v in top]
    assert degrees == sorted(degrees, reverse=True)
    assert all(d > 10 for d in degrees)


def test_neighbors_are_symmetric():
    net = build_scale_free(200, 2, seed=5)
    for v, adj in enumerate(net.neighbors):
        assert list(adj) == sorted(adj)
        for u in adj:
            assert v in net.neighbors[u]
    assert sum(len(a) for a in net.neighbors) == 2 * net.n_edges


def test_metadata_keys(small_lattice):
    meta = small_lattice.metadata()
    assert set(meta) == {"topology", "params", "seed", "n_nodes", "n_edges", "mean_degree", "degree_histogram"}
    assert sum(meta["degree_histogram"]) == 100


@pytest.mark.slow
def test_scale_free_hub_count_in_range():
    counts = [len(hubs(build_scale_free(1600, 2, seed=s), 50)) for s in range(10)]
    assert 1 <= np.mean(counts) <= 15


def test_fully_rewired_small_lattice():
    nets = [build_small_world(4, 1.0, seed=s) for s in range(50)]
    assert all(net.n_edges == 24 for net in nets)
    assert all(int(net.degrees.sum()) == 48 for net in nets)
    # endpoint rewiring can strand a node that anchors none of its edges
    assert sum(nx.is_connected(net.graph) for net in nets) >= 20


@pytest.mark.slow
def test_scale_free_degree_exponent():
    degrees = np.concatenate([build_scale_free(1600, 2, seed=s).degrees for s in range(20)])
    fit = fit_power_law(degrees, x_min=10.0)
    assert -3.4 <= fit.parameter <= -2.6
