"""Static FLOP and parameter counting over a NetworkIR.

Conventions (chosen so that ResNet-50 lands at ~4.1B under the same rules):

- FLOPs are multiply-adds: one MAC = 1 FLOP. Counted at output resolution.
- Separable conv = 3x3 depthwise (9*Cin per output element) plus 1x1
  pointwise (Cin*Cout); regular 3x3 conv = 9*Cin*Cout.
- Convolutions carry no bias (batch norm follows every one); the final fully
  connected layer has weights and biases. BN affine scale/shift count as
  parameters (2 per channel), BN running statistics do not.
- Aggregation weights count as parameters (one per incoming edge) and their
  multiply-adds are included, evaluated at the node's input resolution.
  The output pseudo-node's unweighted mean contributes nothing.
- Pooling contributes 9 compare/add window ops per output element; these are
  reported separately and excluded from the MAC total unless requested.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .assemble import assemble, conv_out_resolution
from .errors import ParameterError
from .graphs import GeneratorSpec
from .ir import IRNode, NetworkIR, OpKind, Regime, StageIR


@dataclass(frozen=True)
class NodeCost:
    location: str  # e.g. "conv3/5", "stem/conv1", "head/fc"
    flops: int
    params: int
    pool_ops: int = 0


@dataclass(frozen=True)
class ComplexityReport:
    per_node: tuple[NodeCost, ...]
    stem: tuple[NodeCost, ...]
    head: tuple[NodeCost, ...]
    total_flops: int
    total_params: int
    total_pool_ops: int
    resolution_trace: tuple[tuple[str, int], ...]
    metadata: dict = field(compare=False)

    def to_json_dict(self) -> dict:
        def rows(entries: Sequence[NodeCost]) -> list[dict]:
            return [
                {"location": e.location, "flops": e.flops, "params": e.params, "pool_ops": e.pool_ops}
                for e in entries
            ]

        return {
            "schema_version": 1,
            "per_node": rows(self.per_node),
            "stem": rows(self.stem),
            "head": rows(self.head),
            "total_flops": self.total_flops,
            "total_params": self.total_params,
            "total_pool_ops": self.total_pool_ops,
            "resolution_trace": [[name, res] for name, res in self.resolution_trace],
            "metadata": self.metadata,
        }


def _node_cost(node: IRNode, stage: StageIR, location: str, stage_in_res: int) -> NodeCost:
    out_res = stage.resolution
    in_res = stage_in_res if node.stride == 2 else out_res
    cin, cout = node.in_channels, node.out_channels

    if node.kind == OpKind.AGGREGATE_ONLY:
        return NodeCost(location=location, flops=0, params=0)

    agg_flops = len(node.in_edges) * cin * in_res * in_res
    agg_params = len(node.in_edges)

    pool_ops = 0
    if node.kind == OpKind.SEPARABLE_CONV_3X3:
        conv_flops = (9 * cin + cin * cout) * out_res * out_res
        conv_params = 9 * cin + cin * cout
    elif node.kind == OpKind.REGULAR_CONV_3X3:
        conv_flops = 9 * cin * cout * out_res * out_res
        conv_params = 9 * cin * cout
    elif node.kind in (OpKind.MAXPOOL3X3_CONV1X1, OpKind.AVGPOOL3X3_CONV1X1):
        conv_flops = cin * cout * out_res * out_res
        conv_params = cin * cout
        pool_ops = 9 * cin * out_res * out_res
    else:
        raise ParameterError(f"cannot cost node kind {node.kind}")

    bn_params = 2 * cout
    return NodeCost(
        location=location,
        flops=agg_flops + conv_flops,
        params=agg_params + conv_params + bn_params,
        pool_ops=pool_ops,
    )


def analyze(ir: NetworkIR, include_pool_ops: bool = False) -> ComplexityReport:
    """Count FLOPs (multiply-adds) and parameters for every node of the IR."""
    trace = []
    resolution = ir.input_resolution

    stem_costs = []
    for s in ir.stem:
        resolution = conv_out_resolution(resolution, s.stride)
        flops = 9 * s.in_channels * s.out_channels * resolution * resolution
        params = 9 * s.in_channels * s.out_channels + 2 * s.out_channels
        stem_costs.append(NodeCost(location=f"stem/{s.name}", flops=flops, params=params))
        trace.append((s.name, resolution))

    node_costs = []
    for stage in ir.stages:
        stage_in_res = resolution
        resolution = stage.resolution
        trace.append((stage.name, stage.resolution))
        for node in stage.nodes:
            node_costs.append(_node_cost(node, stage, f"{stage.name}/{node.id}", stage_in_res))

    final_res = ir.stages[-1].resolution
    head = ir.head
    head_costs = [
        NodeCost(
            location="head/conv1x1",
            flops=head.in_channels * head.conv_channels * final_res * final_res,
            params=head.in_channels * head.conv_channels + 2 * head.conv_channels,
        ),
        NodeCost(
            location="head/fc",
            flops=head.conv_channels * head.class_count,
            params=head.conv_channels * head.class_count + head.class_count,
        ),
    ]
    trace.append(("classifier", 1))

    everything = stem_costs + node_costs + head_costs
    pool_ops = sum(e.pool_ops for e in everything)
    total_flops = sum(e.flops for e in everything) + (pool_ops if include_pool_ops else 0)
    total_params = sum(e.params for e in everything)

    return ComplexityReport(
        per_node=tuple(node_costs),
        stem=tuple(stem_costs),
        head=tuple(head_costs),
        total_flops=total_flops,
        total_params=total_params,
        total_pool_ops=pool_ops,
        resolution_trace=tuple(trace),
        metadata={
            "spec": ir.provenance.to_json_dict(),
            "regime": ir.regime.value,
            "base_channels": ir.base_channels,
            "op_kind": ir.op_kind.value,
            "include_pool_ops": include_pool_ops,
        },
    )


def network_flops(
    spec: GeneratorSpec,
    regime: Regime,
    channels: int,
    op_kind: OpKind = OpKind.SEPARABLE_CONV_3X3,
    class_count: int = 1000,
    input_resolution: int = 224,
) -> int:
    ir = assemble(spec, regime, channels, op_kind, class_count, input_resolution)
    return analyze(ir).total_flops


def fit_channels(
    spec: GeneratorSpec,
    regime: Regime,
    target_flops: float,
    search_range: tuple[int, int] = (1, 1024),
    op_kind: OpKind = OpKind.SEPARABLE_CONV_3X3,
    class_count: int = 1000,
    input_resolution: int = 224,
) -> int:
    """Integer channel width whose total FLOPs is closest to the target.

    Total FLOPs is monotone increasing in the width, so a binary search finds
    the crossing point and a local scan picks the nearest integer.
    """
    lo, hi = search_range
    if lo > hi or lo < 1:
        raise ParameterError(f"invalid search range {search_range}")
    if target_flops <= 0:
        raise ParameterError(f"target flops must be positive, got {target_flops}")

    def cost(c: int) -> int:
        return network_flops(spec, regime, c, op_kind, class_count, input_resolution)

    lo0, hi0 = lo, hi
    while lo < hi:
        mid = (lo + hi) // 2
        if cost(mid) < target_flops:
            lo = mid + 1
        else:
            hi = mid
    candidates = {max(lo0, min(hi0, c)) for c in (lo - 1, lo, lo + 1)}
    return min(candidates, key=lambda c: (abs(cost(c) - target_flops), c))


@dataclass(frozen=True)
class SpreadReport:
    """Dispersion of totals across a set of same-budget networks.

    ``*_spread`` is the maximum relative deviation from the mean; the
    ``*_range`` variants report (max-min)/mean.
    """

    flops_values: tuple[int, ...]
    params_values: tuple[int, ...]
    flops_spread: float
    params_spread: float
    flops_range: float
    params_range: float


def _spread(values: Sequence[int]) -> tuple[float, float]:
    mean = sum(values) / len(values)
    max_dev = max(abs(v - mean) for v in values) / mean
    rng = (max(values) - min(values)) / mean
    return max_dev, rng


def decoupling_check(
    entries: Sequence[tuple[GeneratorSpec, Regime, int]],
    op_kind: OpKind = OpKind.SEPARABLE_CONV_3X3,
    class_count: int = 1000,
    input_resolution: int = 224,
) -> SpreadReport:
    """How far FLOPs/params drift across networks meant to share a budget.

    All entries must share the same regime and channel width.
    """
    if len(entries) < 2:
        raise ParameterError("need at least two specs to measure a spread")
    regimes = {r for _, r, _ in entries}
    widths = {c for _, _, c in entries}
    if len(regimes) > 1:
        raise ParameterError(f"mixed regimes in decoupling check: {sorted(r.value for r in regimes)}")
    if len(widths) > 1:
        raise ParameterError(f"mixed channel widths in decoupling check: {sorted(widths)}")

    flops, params = [], []
    for spec, regime, channels in entries:
        report = analyze(assemble(spec, regime, channels, op_kind, class_count, input_resolution))
        flops.append(report.total_flops)
        params.append(report.total_params)
    f_dev, f_rng = _spread(flops)
    p_dev, p_rng = _spread(params)
    return SpreadReport(
        flops_values=tuple(flops),
        params_values=tuple(params),
        flops_spread=f_dev,
        params_spread=p_dev,
        flops_range=f_rng,
        params_range=p_rng,
    )


def text_table(ir: NetworkIR, report: ComplexityReport) -> str:
    """Aligned plain-text table: stage, node, in/out degree, flops, params."""
    rows = [("stage", "node", "in", "out", "flops", "params")]
    for s, cost in zip(ir.stem, report.stem):
        rows.append(("stem", s.name, "-", "-", str(cost.flops), str(cost.params)))
    cost_by_loc = {c.location: c for c in report.per_node}
    for stage in ir.stages:
        out_deg = {n.id: 0 for n in stage.nodes}
        for n in stage.nodes:
            for src in n.in_edges:
                out_deg[src] += 1
        for node in stage.nodes:
            cost = cost_by_loc[f"{stage.name}/{node.id}"]
            label = str(node.id)
            if node.id == stage.input_node:
                label = "in"
            elif node.id == stage.output_node:
                label = "out"
            rows.append(
                (
                    stage.name,
                    label,
                    str(len(node.in_edges)),
                    str(out_deg[node.id]),
                    str(cost.flops),
                    str(cost.params),
                )
            )
    for cost in report.head:
        rows.append(("head", cost.location.split("/", 1)[1], "-", "-", str(cost.flops), str(cost.params)))
    rows.append(("total", "", "", "", str(report.total_flops), str(report.total_params)))

    widths = [max(len(r[i]) for r in rows) for i in range(6)]
    lines = []
    for r in rows:
        lines.append("  ".join(col.rjust(w) if i >= 2 else col.ljust(w) for i, (col, w) in enumerate(zip(r, widths))))
    return "\n".join(lines) + "\n"


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and (n-1) standard deviation."""
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)
