import json

import pytest

from randwire import (
    OpKind,
    ParameterError,
    Regime,
    analyze,
    assemble,
    decoupling_check,
    fit_channels,
)
from randwire.complexity import mean_std, text_table
from randwire.ir import ir_from_json, ir_to_json
from randwire.microexec import damage, init_weights

from conftest import ba_spec, er_spec, ws_spec


def cost_of(report, location):
    return next(c for c in report.per_node if c.location == location)


def test_separable_node_hand_arithmetic():
    # one stride-1 separable node at 78 channels on a 28x28 map:
    # conv macs (9*78 + 78*78) * 28 * 28, conv params 9*78 + 78*78, bn 2*78
    ir = assemble(ws_spec(seed=1), Regime.SMALL, 78)
    stage = ir.stage_by_name("conv3")
    node = next(n for n in stage.internal_nodes() if n.stride == 1)
    report = analyze(ir)
    cost = cost_of(report, f"conv3/{node.id}")
    d = len(node.in_edges)
    conv_macs = (9 * 78 + 78 * 78) * 28 * 28
    assert conv_macs == 5_320_224
    assert cost.flops == conv_macs + d * 78 * 28 * 28  # + aggregation multiplies
    assert cost.params == (9 * 78 + 78 * 78 + 2 * 78) + d
    assert 9 * 78 + 78 * 78 + 2 * 78 == 6_942


def test_pseudo_nodes_cost_nothing():
    ir = assemble(ws_spec(seed=1), Regime.SMALL, 16)
    report = analyze(ir)
    for stage in ir.stages:
        for nid in (stage.input_node, stage.output_node):
            cost = cost_of(report, f"{stage.name}/{nid}")
            assert cost.flops == 0 and cost.params == 0


def test_totals_are_sums():
    ir = assemble(ba_spec(seed=2), Regime.SMALL, 16)
    report = analyze(ir)
    parts = list(report.per_node) + list(report.stem) + list(report.head)
    assert report.total_flops == sum(c.flops for c in parts)
    assert report.total_params == sum(c.params for c in parts)
    assert all(c.flops >= 0 and c.params >= 0 for c in parts)


def test_pool_ops_flag():
    ir = assemble(ws_spec(seed=1), Regime.SMALL, 16, op_kind=OpKind.MAXPOOL3X3_CONV1X1)
    base = analyze(ir)
    with_pool = analyze(ir, include_pool_ops=True)
    assert with_pool.total_pool_ops == base.total_pool_ops > 0
    assert with_pool.total_flops == base.total_flops + base.total_pool_ops
    assert with_pool.total_params == base.total_params


def test_resolution_trace():
    ir = assemble(ws_spec(seed=1), Regime.SMALL, 78)
    report = analyze(ir)
    assert report.resolution_trace == (
        ("conv1", 112),
        ("conv2", 56),
        ("conv3", 28),
        ("conv4", 14),
        ("conv5", 7),
        ("classifier", 1),
    )


def test_quadratic_channel_scaling():
    # 1x1-dominated nodes: doubling C should nearly quadruple total flops
    base = analyze(assemble(ws_spec(seed=1), Regime.SMALL, 78)).total_flops
    doubled = analyze(assemble(ws_spec(seed=1), Regime.SMALL, 156)).total_flops
    assert 3.5 <= doubled / base <= 4.0


def test_edge_removal_changes_only_aggregation_terms():
    # exact identity: an edge costs one aggregation weight and its multiplies
    ir = assemble(ws_spec(seed=1), Regime.SMALL, 78)
    store = init_weights(ir, seed=0)
    before = analyze(ir)
    for si, stage in enumerate(ir.stages):
        for src, dst in stage.internal_edges():
            damaged, _, _ = damage(ir, store, ("edge", si, src, dst))
            after = analyze(damaged)
            target = stage.node_by_id(dst)
            assert target.stride == 1  # internal edges never feed entry nodes
            agg_macs = target.in_channels * stage.resolution**2
            assert before.total_params - after.total_params == 1
            assert before.total_flops - after.total_flops == agg_macs
            # worst removable edge sits at the highest-resolution stage: ~0.01%
            assert (before.total_params - after.total_params) / before.total_params < 1e-6
            assert (before.total_flops - after.total_flops) / before.total_flops < 2e-4


def swappable_pair(stage):
    """Adjacent internal ids (v, v+1) with no direct edge between them.

    Swapping such ids preserves the src < dst ordering of every edge, so the
    relabeled stage is still a valid topologically indexed DAG.
    """
    edges = set(stage.internal_edges())
    for v in range(stage.n_internal - 1):
        if (v, v + 1) not in edges:
            return v, v + 1
    return None


def test_totals_invariant_under_relabeling():
    # swapping the ids of two incomparable internal nodes keeps totals fixed
    ir = assemble(er_spec(n=8, p=0.3, seed=2), Regime.SMALL, 8, class_count=10, input_resolution=32)
    report = analyze(ir)
    pair = swappable_pair(ir.stages[0])
    assert pair is not None
    a, b = pair
    doc = json.loads(ir_to_json(ir))
    stage = doc["stages"][0]
    ids = {n["id"] for n in stage["nodes"]}
    swap = {a: b, b: a}
    for n in stage["nodes"]:
        n["id"] = swap.get(n["id"], n["id"])
        n["in_edges"] = sorted(swap.get(s, s) for s in n["in_edges"])
    stage["nodes"].sort(key=lambda n: n["id"])
    del stage["graph"], stage["index_map"]
    relabeled = ir_from_json(json.dumps(doc))
    assert analyze(relabeled).total_flops == report.total_flops
    assert analyze(relabeled).total_params == report.total_params
    assert ids == {n.id for n in relabeled.stages[0].nodes}


# --- budget and decoupling ------------------------------------------------


def seeds_1_to_5(make_spec):
    return [make_spec(seed=s) for s in range(1, 6)]


def test_ws_small_budget_five_seeds():
    flops, params = [], []
    for spec in seeds_1_to_5(ws_spec):
        report = analyze(assemble(spec, Regime.SMALL, 78))
        flops.append(report.total_flops)
        params.append(report.total_params)
    f_mean, _ = mean_std(flops)
    p_mean, _ = mean_std(params)
    assert abs(f_mean - 583e6) / 583e6 < 0.05
    assert abs(p_mean - 5.6e6) / 5.6e6 < 0.05


@pytest.mark.parametrize("channels,flops_target,params_target", [
    (109, 4.0e9, 31.9e6),
    (154, 7.9e9, 61.5e6),
])
def test_ws_regular_budget_five_seeds(channels, flops_target, params_target):
    flops, params = [], []
    for spec in seeds_1_to_5(ws_spec):
        report = analyze(assemble(spec, Regime.REGULAR, channels))
        flops.append(report.total_flops)
        params.append(report.total_params)
    assert abs(mean_std(flops)[0] - flops_target) / flops_target < 0.05
    assert abs(mean_std(params)[0] - params_target) / params_target < 0.05


def test_decoupling_across_generators():
    entries = []
    for make in (er_spec, ba_spec, ws_spec):
        for spec in seeds_1_to_5(make):
            entries.append((spec, Regime.SMALL, 78))
    report = decoupling_check(entries)
    assert report.flops_spread <= 0.025


def test_decoupling_one_seed_each():
    entries = [(er_spec(seed=1), Regime.SMALL, 78), (ba_spec(seed=1), Regime.SMALL, 78),
               (ws_spec(seed=1), Regime.SMALL, 78)]
    report = decoupling_check(entries)
    assert report.flops_spread <= 0.025


def test_decoupling_identical_specs_zero_spread():
    entries = [(ws_spec(seed=1), Regime.SMALL, 78)] * 2
    report = decoupling_check(entries)
    assert report.flops_spread == 0.0
    assert report.params_spread == 0.0


def test_decoupling_rejects_mixed_regimes():
    with pytest.raises(ParameterError):
        decoupling_check([(ws_spec(seed=1), Regime.SMALL, 78), (ws_spec(seed=2), Regime.REGULAR, 78)])
    with pytest.raises(ParameterError):
        decoupling_check([(ws_spec(seed=1), Regime.SMALL, 78)])


# --- channel fitting --------------------------------------------------------


def test_fit_channels_small_regime():
    c = fit_channels(ws_spec(seed=1), Regime.SMALL, 583e6)
    assert abs(c - 78) <= 1


def test_fit_channels_regular_regime():
    c = fit_channels(ws_spec(seed=1), Regime.REGULAR, 4.0e9)
    assert abs(c - 109) <= 2


def test_fit_channels_fixed_point():
    target = analyze(assemble(ws_spec(seed=3), Regime.SMALL, 44)).total_flops
    assert fit_channels(ws_spec(seed=3), Regime.SMALL, target) == 44


def test_fit_channels_bad_inputs():
    with pytest.raises(ParameterError):
        fit_channels(ws_spec(seed=1), Regime.SMALL, 1e6, search_range=(10, 5))
    with pytest.raises(ParameterError):
        fit_channels(ws_spec(seed=1), Regime.SMALL, -5.0)


def test_text_table_has_total_row():
    ir = assemble(ws_spec(n=4, k=2, p=0.0, seed=1), Regime.SMALL, 8, class_count=10, input_resolution=32)
    report = analyze(ir)
    table = text_table(ir, report)
    assert str(report.total_flops) in table
    assert table.splitlines()[0].split()[:2] == ["stage", "node"]
