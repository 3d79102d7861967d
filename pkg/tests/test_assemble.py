import pytest

from randwire import (
    OpKind,
    ParameterError,
    Regime,
    assemble,
    ir_from_json,
    ir_to_json,
    node_semantics,
)

from conftest import ba_spec, er_spec, ws_spec


def test_small_regime_layout():
    ir = assemble(ws_spec(seed=2), Regime.SMALL, 78)
    assert [s.name for s in ir.stem] == ["conv1", "conv2"]
    assert ir.stem[0].out_channels == 39 and ir.stem[0].stride == 2
    assert ir.stem[0].relu_first is False  # conv1 is Conv-BN
    assert ir.stem[1].out_channels == 78 and ir.stem[1].relu_first is True
    assert [s.name for s in ir.stages] == ["conv3", "conv4", "conv5"]
    assert [s.n_internal for s in ir.stages] == [32, 32, 32]
    assert [s.channels for s in ir.stages] == [78, 156, 312]
    assert [s.resolution for s in ir.stages] == [28, 14, 7]
    assert ir.head.in_channels == 312
    assert ir.head.conv_channels == 1280
    assert ir.head.class_count == 1000


def test_regular_regime_layout():
    ir = assemble(ws_spec(seed=1), Regime.REGULAR, 109)
    assert [s.name for s in ir.stem] == ["conv1"]
    assert ir.stem[0].out_channels == 55  # 109/2 rounded half up
    assert [s.name for s in ir.stages] == ["conv2", "conv3", "conv4", "conv5"]
    assert [s.n_internal for s in ir.stages] == [16, 32, 32, 32]
    assert [s.channels for s in ir.stages] == [109, 218, 436, 872]
    assert [s.resolution for s in ir.stages] == [56, 28, 14, 7]
    assert ir.head.in_channels == 872


def test_regular_regime_needs_even_n():
    with pytest.raises(ParameterError):
        assemble(ws_spec(n=31, k=4, p=0.75), Regime.REGULAR, 109)


def test_tiny_resolution_chain():
    ir = assemble(ws_spec(n=4, k=2, p=0.0), Regime.SMALL, 8, class_count=10, input_resolution=32)
    # stem halves twice (32 -> 16 -> 8), stages continue 4 / 2 / 1
    assert [s.resolution for s in ir.stages] == [4, 2, 1]
    assert ir.head.class_count == 10


def test_channel_bookkeeping_every_edge():
    for seed in (1, 2, 3):
        for spec in (er_spec(seed=seed), ba_spec(seed=seed), ws_spec(seed=seed)):
            ir = assemble(spec, Regime.SMALL, 16)
            for stage in ir.stages:
                for node in stage.nodes:
                    for src in node.in_edges:
                        assert stage.node_by_id(src).out_channels == node.in_channels


def test_stride_two_exactly_on_entry_nodes():
    ir = assemble(ws_spec(seed=3), Regime.SMALL, 16)
    for stage in ir.stages:
        for node in stage.internal_nodes():
            if stage.input_node in node.in_edges:
                assert node.stride == 2
                assert node.in_channels == stage.in_channels
                assert node.in_edges == (stage.input_node,)
            else:
                assert node.stride == 1
                assert node.in_channels == stage.channels


def enumerate_paths(stage):
    """All input->output paths through a stage (small graphs only)."""
    succ = {n.id: [] for n in stage.nodes}
    for n in stage.nodes:
        for src in n.in_edges:
            succ[src].append(n.id)

    paths = []

    def walk(node, acc):
        if node == stage.output_node:
            paths.append(list(acc))
            return
        for nxt in succ[node]:
            walk(nxt, acc + [nxt])

    walk(stage.input_node, [])
    return paths


def test_stride_product_along_every_path_is_two():
    ir = assemble(ws_spec(n=8, k=4, p=0.5, seed=5), Regime.SMALL, 8, class_count=10, input_resolution=32)
    for stage in ir.stages:
        paths = enumerate_paths(stage)
        assert paths
        for path in paths:
            strides = [stage.node_by_id(v).stride for v in path if v < stage.n_internal]
            product = 1
            for s in strides:
                product *= s
            assert product == 2


def test_assemble_is_pure():
    a = assemble(ws_spec(seed=4), Regime.SMALL, 16)
    b = assemble(ws_spec(seed=4), Regime.SMALL, 16)
    assert a == b


def test_stages_wired_independently():
    ir = assemble(ws_spec(seed=4), Regime.SMALL, 16)
    graphs = [s.graph for s in ir.stages]
    assert graphs[0] != graphs[1] and graphs[1] != graphs[2]
    seeds = [s.seed for s in ir.stages]
    assert len(set(seeds)) == 3


@pytest.mark.parametrize("kind", [OpKind.SEPARABLE_CONV_3X3, OpKind.REGULAR_CONV_3X3,
                                  OpKind.MAXPOOL3X3_CONV1X1, OpKind.AVGPOOL3X3_CONV1X1])
def test_round_trip_identity(kind):
    ir = assemble(ba_spec(n=8, m=2, seed=6), Regime.SMALL, 8, op_kind=kind,
                  class_count=10, input_resolution=32)
    assert ir_from_json(ir_to_json(ir)) == ir


def test_round_trip_identity_regular():
    ir = assemble(er_spec(n=8, p=0.4, seed=2), Regime.REGULAR, 8, class_count=10, input_resolution=64)
    assert ir_from_json(ir_to_json(ir)) == ir


# --- node semantics ------------------------------------------------------


def find_node(ir, in_degree, out_degree=None):
    for stage in ir.stages:
        out_deg = {n.id: 0 for n in stage.nodes}
        for n in stage.nodes:
            for src in n.in_edges:
                out_deg[src] += 1
        for n in stage.internal_nodes():
            if len(n.in_edges) == in_degree and (out_degree is None or out_deg[n.id] == out_degree):
                return stage, n
    return None, None


def test_semantics_multi_input_node():
    # a node with 3 in-edges and 4 out-edges: 3 sigmoid weights, one
    # transform, identical copies on all 4 out-edges
    ir = assemble(ws_spec(seed=4), Regime.SMALL, 16)
    stage, node = find_node(ir, in_degree=3, out_degree=4)
    assert node is not None
    steps = node_semantics(node)
    assert steps[0] == ("weighted_sum", {"weights": 3, "positive_via": "sigmoid"})
    assert steps[1] == ("relu", {})
    assert steps[-1] == ("fan_out", {})
    assert node.aggregation_weight_count == 3


def test_semantics_single_input_reduces_to_one_term():
    ir = assemble(ws_spec(seed=1), Regime.SMALL, 16)
    stage, node = find_node(ir, in_degree=1)
    assert node is not None
    steps = node_semantics(node)
    assert steps[0] == ("weighted_sum", {"weights": 1, "positive_via": "sigmoid"})


def test_semantics_output_pseudo_node_mean():
    ir = assemble(er_spec(seed=5), Regime.SMALL, 16)
    stage = ir.stages[0]
    out = stage.node_by_id(stage.output_node)
    steps = node_semantics(out)
    assert steps == [("mean", {"inputs": len(out.in_edges)})]
    assert out.aggregation_weight_count == 0  # unweighted, no parameters


def test_semantics_input_pseudo_node_fans_out():
    ir = assemble(er_spec(seed=5), Regime.SMALL, 16)
    stage = ir.stages[0]
    inp = stage.node_by_id(stage.input_node)
    assert node_semantics(inp) == [("fan_out", {})]


def test_semantics_separable_conv_steps():
    ir = assemble(ws_spec(seed=2), Regime.SMALL, 16)
    stage = ir.stages[1]  # conv4: channel change at entry nodes
    entry = next(n for n in stage.internal_nodes() if n.stride == 2)
    steps = dict(node_semantics(entry))
    assert steps["depthwise_conv3x3"] == {"channels": stage.in_channels, "stride": 2}
    assert steps["conv1x1"] == {"in_channels": stage.in_channels, "out_channels": stage.channels}
