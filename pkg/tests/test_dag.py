import random

import pytest

from randwire import (
    ContractError,
    GraphFamily,
    dag_from_sample,
    sample,
    to_dag,
    validate_dag,
)
from randwire.graphs import UndirectedGraph

from conftest import ba_spec, er_spec, ws_spec


def dfs_has_cycle(n_nodes, succ):
    """Independent three-color DFS cycle oracle (recursive)."""
    color = {}

    def visit(v):
        color[v] = "gray"
        for w in succ.get(v, ()):
            c = color.get(w)
            if c == "gray":
                return True
            if c is None and visit(w):
                return True
        color[v] = "black"
        return False

    return any(color.get(v) is None and visit(v) for v in range(n_nodes))


def full_successors(d):
    succ = {v: [] for v in range(d.n_internal + 2)}
    for s, t in d.edges:
        succ[s].append(t)
    for v in d.original_inputs:
        succ[d.input_node].append(v)
    for v in d.original_outputs:
        succ[v].append(d.output_node)
    return succ


def test_triangle_identity_indexing():
    g = UndirectedGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    d = to_dag(g, GraphFamily.WS, order=[0, 1, 2])
    assert d.edges == ((0, 1), (0, 2), (1, 2))
    assert d.original_inputs == (0,)
    assert d.original_outputs == (2,)


def test_ws_ring_clockwise():
    d = dag_from_sample(sample(ws_spec(n=4, k=2, p=0.0)))
    assert d.edges == ((0, 1), (0, 3), (1, 2), (2, 3))
    assert d.original_inputs == (0,)
    assert d.original_outputs == (3,)


def test_index_order_is_topological():
    # Kahn's algorithm, computed independently, must be able to emit 0..n-1 in order
    for spec in (er_spec(seed=3), ba_spec(seed=3), ws_spec(seed=3)):
        d = dag_from_sample(sample(spec))
        in_deg = dict(enumerate(d.in_degrees()))
        emitted = []
        ready = sorted(v for v, deg in in_deg.items() if deg == 0)
        succ = {v: [] for v in range(d.n_internal)}
        for s, t in d.edges:
            succ[s].append(t)
        while ready:
            v = ready.pop(0)
            emitted.append(v)
            for w in succ[v]:
                in_deg[w] -= 1
                if in_deg[w] == 0:
                    ready.append(w)
            ready.sort()
        assert emitted == sorted(emitted) == list(range(d.n_internal))


def test_orientation_preserves_edges_and_degrees():
    for seed in range(1, 20):
        for spec in (er_spec(seed=seed), ba_spec(seed=seed), ws_spec(seed=seed)):
            s = sample(spec)
            d = dag_from_sample(s)
            assert len(d.edges) == s.graph.edge_count
            in_deg, out_deg = d.in_degrees(), d.out_degrees()
            degrees = s.graph.degrees()
            for node_id in range(s.graph.n):
                idx = d.index_map[node_id]
                assert in_deg[idx] + out_deg[idx] == degrees[node_id]


def test_cycle_oracle_over_sampled_graphs():
    for seed in range(1, 30):
        for spec in (er_spec(seed=seed), ba_spec(seed=seed), ws_spec(seed=seed)):
            d = dag_from_sample(sample(spec))
            assert not dfs_has_cycle(d.n_internal + 2, full_successors(d))


def test_validate_dag_connected_graph():
    d = dag_from_sample(sample(ws_spec(seed=1)))
    diag = validate_dag(d)
    assert diag.cycle_free
    assert diag.unreachable == ()
    assert diag.isolated == ()
    assert diag.ok


def test_validate_dag_er_p0_all_isolated():
    d = dag_from_sample(sample(er_spec(n=3, p=0.0, seed=1)))
    diag = validate_dag(d)
    assert diag.cycle_free
    assert diag.isolated == (0, 1, 2)
    assert d.original_inputs == (0, 1, 2)
    assert d.original_outputs == (0, 1, 2)
    assert diag.unreachable == ()  # isolated nodes hang off the pseudo input


def test_missing_order_contract():
    g = sample(ws_spec(seed=1)).graph
    with pytest.raises(ContractError):
        to_dag(g, GraphFamily.WS)
    with pytest.raises(ContractError):
        to_dag(g, GraphFamily.BA)
    with pytest.raises(ContractError):
        to_dag(g, GraphFamily.ER)  # no order and no rng


def test_er_order_drawn_from_rng():
    g = sample(er_spec(seed=2)).graph
    a = to_dag(g, GraphFamily.ER, rng=random.Random(10))
    b = to_dag(g, GraphFamily.ER, rng=random.Random(10))
    c = to_dag(g, GraphFamily.ER, rng=random.Random(11))
    assert a == b
    assert a != c


def test_bad_order_rejected():
    g = sample(ws_spec(n=4, k=2, p=0.0)).graph
    with pytest.raises(ContractError):
        to_dag(g, GraphFamily.WS, order=[0, 1, 1, 3])


def test_every_node_reaches_output_when_connected():
    for seed in range(1, 10):
        for spec in (ba_spec(seed=seed), ws_spec(seed=seed)):
            s = sample(spec)
            d = dag_from_sample(s)
            succ = full_successors(d)
            # reverse reachability from the output pseudo-node
            pred = {v: [] for v in range(d.n_internal + 2)}
            for a, outs in succ.items():
                for b in outs:
                    pred[b].append(a)
            seen = {d.output_node}
            frontier = [d.output_node]
            while frontier:
                v = frontier.pop()
                for w in pred[v]:
                    if w not in seen:
                        seen.add(w)
                        frontier.append(w)
            assert all(v in seen for v in range(d.n_internal))
