import math
import random

import pytest

from randwire import (
    GeneratorSpec,
    GraphFamily,
    ParameterError,
    is_connected,
    ring_lattice,
    sample,
    sample_ba,
    sample_er,
    sample_ws,
)
from randwire.graphs import UndirectedGraph

from conftest import ba_spec, er_spec, ws_spec


def assert_simple(g):
    assert all(u < v for u, v in g.edges)
    assert len(set(g.edges)) == g.edge_count
    assert all(0 <= u < g.n and 0 <= v < g.n for u, v in g.edges)


# --- ER ---------------------------------------------------------------


def test_er_p0_empty():
    g = sample_er(32, 0.0, random.Random(1))
    assert g.edge_count == 0


def test_er_p1_complete():
    g = sample_er(32, 1.0, random.Random(1))
    assert g.edge_count == 32 * 31 // 2 == 496


def test_er_invalid_probability():
    with pytest.raises(ParameterError):
        sample_er(32, 1.5, random.Random(1))
    with pytest.raises(ParameterError):
        sample_er(32, -0.1, random.Random(1))


def test_er_edge_count_statistics():
    # binomial over 496 pairs: mean within 3 standard errors over 1000 seeds
    runs = 1000
    counts = [sample_er(32, 0.2, random.Random(s)).edge_count for s in range(1, runs + 1)]
    mean = sum(counts) / runs
    se = math.sqrt(496 * 0.2 * 0.8 / runs)
    assert abs(mean - 99.2) <= 3 * se


def test_er_connected_fraction():
    runs = 1000
    connected = sum(
        is_connected(sample_er(32, 0.2, random.Random(s))) for s in range(1, runs + 1)
    )
    assert connected / runs >= 0.9


# --- BA ---------------------------------------------------------------


def test_ba_m1_is_tree():
    for seed in range(1, 20):
        g = sample_ba(5, 1, random.Random(seed))
        assert g.edge_count == 4  # 1 * (5 - 1)
        assert is_connected(g)
        # connected + n-1 edges == tree (acyclic as an undirected graph)
        assert g.edge_count == g.n - 1


def test_ba_exact_edge_count_n32_m5():
    for seed in range(1, 51):
        g = sample_ba(32, 5, random.Random(seed))
        assert g.edge_count == 5 * (32 - 5) == 135
        assert_simple(g)


def test_ba_two_nodes():
    g = sample_ba(2, 1, random.Random(9))
    assert g.edges == ((0, 1),)


def test_ba_edge_count_law_random_triples():
    rng = random.Random(20240817)
    for _ in range(200):
        n = rng.randrange(2, 65)
        m = rng.randrange(1, n)
        g = sample_ba(n, m, random.Random(rng.randrange(1, 10**9)))
        assert g.edge_count == m * (n - m)
        assert_simple(g)


def test_ba_invalid_m():
    with pytest.raises(ParameterError):
        sample_ba(10, 0, random.Random(1))
    with pytest.raises(ParameterError):
        sample_ba(10, 10, random.Random(1))


# --- WS ---------------------------------------------------------------


def test_ws_p0_is_ring_lattice():
    g = sample_ws(32, 4, 0.0, random.Random(5))
    assert g == ring_lattice(32, 4)
    assert g.edge_count == 32 * 4 // 2 == 64
    adj = g.adjacency()
    for v in range(32):
        assert adj[v] == {(v + d) % 32 for d in (-2, -1, 1, 2)}


def test_ws_edge_count_invariant_under_rewiring():
    for seed in range(1, 30):
        g = sample_ws(32, 4, 0.75, random.Random(seed))
        assert g.edge_count == 64
        assert_simple(g)


def test_ws_4cycle():
    g = sample_ws(4, 2, 0.0, random.Random(3))
    assert g.edges == ((0, 1), (0, 3), (1, 2), (2, 3))


def test_ws_edge_count_law_random_params():
    rng = random.Random(99)
    for _ in range(200):
        n = rng.randrange(3, 65)
        k = rng.randrange(1, (n - 1) // 2 + 1) * 2
        p = rng.random()
        g = sample_ws(n, k, p, random.Random(rng.randrange(1, 10**9)))
        assert g.edge_count == n * k // 2
        assert_simple(g)


def test_ws_invalid_parameters():
    with pytest.raises(ParameterError):
        sample_ws(10, 3, 0.5, random.Random(1))  # odd k
    with pytest.raises(ParameterError):
        sample_ws(10, 10, 0.5, random.Random(1))  # k >= n
    with pytest.raises(ParameterError):
        sample_ws(10, 4, 1.5, random.Random(1))


# --- connectivity helper ----------------------------------------------


def test_is_connected_trivial_cases():
    complete = sample_er(5, 1.0, random.Random(1))
    assert is_connected(complete)
    empty = UndirectedGraph(n=3, edges=())
    assert not is_connected(empty)
    assert is_connected(UndirectedGraph(n=1, edges=()))
    assert is_connected(UndirectedGraph(n=0, edges=()))


# --- spec + sampling entry point ---------------------------------------


@pytest.mark.parametrize("make", [er_spec, ba_spec, ws_spec])
def test_sample_is_deterministic(make):
    spec = make(seed=123)
    a, b = sample(spec), sample(spec)
    assert a.graph == b.graph
    assert a.dag_order == b.dag_order


def test_different_seeds_differ():
    a = sample(ws_spec(seed=1)).graph
    b = sample(ws_spec(seed=2)).graph
    assert a != b


def test_er_order_is_permutation():
    s = sample(er_spec(seed=4))
    assert sorted(s.dag_order) == list(range(32))
    assert s.dag_order != tuple(range(32))  # astronomically unlikely to be identity


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(family=GraphFamily.ER, node_count=8, seed=1),  # missing er_p
        dict(family=GraphFamily.ER, node_count=8, seed=1, er_p=2.0),
        dict(family=GraphFamily.ER, node_count=8, seed=1, er_p=0.5, ws_k=4),
        dict(family=GraphFamily.BA, node_count=8, seed=1, ba_m=8),
        dict(family=GraphFamily.WS, node_count=8, seed=1, ws_k=3, ws_p=0.5),
        dict(family=GraphFamily.WS, node_count=8, seed=1, ws_k=4, ws_p=-0.2),
        dict(family=GraphFamily.WS, node_count=0, seed=1, ws_k=4, ws_p=0.2),
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(ParameterError):
        GeneratorSpec(**kwargs)


def test_no_self_loops_or_duplicates_across_families():
    for seed in range(1, 15):
        for spec in (er_spec(seed=seed), ba_spec(seed=seed), ws_spec(seed=seed)):
            assert_simple(sample(spec).graph)
