"""Graph damage: single node/edge removal without retraining.

Removal returns edited copies of the IR and weight store; originals are never
mutated. A node removal deletes the node and all incident edges; downstream
nodes keep their remaining sigmoid weights (no re-normalization). A node left
with no inputs receives a zero tensor during execution (the network is
evaluated as-is, mirroring the no-retraining protocol). Degree metrics count
edges of the executable stage graph, pseudo-node edges included.
"""
from __future__ import annotations

import copy
import random
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from ..errors import ParameterError, StructuralError
from ..ir import IRNode, NetworkIR, StageIR, strip_provenance
from .weights import NodeWeights, WeightStore

NodeRemoval = tuple[str, int, int]  # ("node", stage_index, node_id)
EdgeRemoval = tuple[str, int, int, int]  # ("edge", stage_index, src, dst)
Removal = Union[NodeRemoval, EdgeRemoval]


@dataclass(frozen=True)
class DamageStats:
    kind: str  # "node" | "edge"
    stage_index: int
    element: tuple
    degree_metric: int  # out-degree of removed node / in-degree of edge target
    downstream: tuple[int, ...]  # internal nodes downstream of the removal


def _successors(stage: StageIR) -> dict[int, list[int]]:
    succ: dict[int, list[int]] = {n.id: [] for n in stage.nodes}
    for n in stage.nodes:
        for src in n.in_edges:
            succ[src].append(n.id)
    return succ


def _downstream(stage: StageIR, start: int) -> tuple[int, ...]:
    succ = _successors(stage)
    seen: set[int] = set()
    frontier = [start]
    while frontier:
        v = frontier.pop()
        for nxt in succ.get(v, ()):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return tuple(sorted(v for v in seen if v < stage.n_internal))


def _drop_in_edge(node: IRNode, weights: NodeWeights, src: int) -> tuple[IRNode, NodeWeights]:
    pos = node.in_edges.index(src)
    new_node = replace(node, in_edges=node.in_edges[:pos] + node.in_edges[pos + 1 :])
    new_w = copy.deepcopy(weights)
    if new_w.agg_raw is not None:
        new_w.agg_raw = np.delete(new_w.agg_raw, pos)
    return new_node, new_w


def damage(ir: NetworkIR, store: WeightStore, removal: Removal) -> tuple[NetworkIR, WeightStore, DamageStats]:
    """Remove one internal node or one internal edge from one stage."""
    if removal[0] == "node":
        _, stage_index, node_id = removal
        return _remove_node(ir, store, stage_index, node_id)
    if removal[0] == "edge":
        _, stage_index, src, dst = removal
        return _remove_edge(ir, store, stage_index, src, dst)
    raise ParameterError(f"unknown removal kind {removal[0]!r}")


def _stage_or_raise(ir: NetworkIR, stage_index: int) -> StageIR:
    if not (0 <= stage_index < len(ir.stages)):
        raise ParameterError(f"no stage with index {stage_index}")
    return ir.stages[stage_index]


def _remove_node(ir: NetworkIR, store: WeightStore, stage_index: int, node_id: int):
    stage = _stage_or_raise(ir, stage_index)
    if node_id >= stage.n_internal:
        raise ParameterError("only internal nodes can be removed")
    try:
        stage.node_by_id(node_id)
    except KeyError:
        raise ParameterError(f"stage {stage.name} has no node {node_id}") from None

    degree = stage.out_degree(node_id)
    downstream = _downstream(stage, node_id)

    new_nodes = []
    new_weights: dict[int, NodeWeights] = {}
    for node in stage.nodes:
        if node.id == node_id:
            continue
        w = store.stages[stage_index].get(node.id)
        if node_id in node.in_edges:
            if node.id == stage.output_node and len(node.in_edges) == 1:
                raise StructuralError(
                    f"removing node {node_id} would leave the {stage.name} output node with no inputs"
                )
            if node.is_pseudo:
                node = replace(node, in_edges=tuple(s for s in node.in_edges if s != node_id))
            else:
                node, w = _drop_in_edge(node, w, node_id)
        new_nodes.append(node)
        if w is not None:
            new_weights[node.id] = w

    new_stage = strip_provenance(replace(stage, nodes=tuple(new_nodes)))
    new_ir = replace(ir, stages=ir.stages[:stage_index] + (new_stage,) + ir.stages[stage_index + 1 :])
    new_store = WeightStore(
        stem=store.stem,
        stages=store.stages[:stage_index] + [new_weights] + store.stages[stage_index + 1 :],
        head=store.head,
    )
    stats = DamageStats(
        kind="node",
        stage_index=stage_index,
        element=(node_id,),
        degree_metric=degree,
        downstream=downstream,
    )
    return new_ir, new_store, stats


def _remove_edge(ir: NetworkIR, store: WeightStore, stage_index: int, src: int, dst: int):
    stage = _stage_or_raise(ir, stage_index)
    if src >= stage.n_internal or dst >= stage.n_internal:
        raise ParameterError("only internal edges can be removed")
    try:
        target = stage.node_by_id(dst)
    except KeyError:
        raise ParameterError(f"stage {stage.name} has no node {dst}") from None
    if src not in target.in_edges:
        raise ParameterError(f"stage {stage.name} has no edge {src}->{dst}")

    degree = len(target.in_edges)
    downstream = _downstream(stage, dst) + (dst,)

    new_target, new_w = _drop_in_edge(target, store.stages[stage_index][dst], src)
    new_nodes = tuple(new_target if n.id == dst else n for n in stage.nodes)
    new_weights = dict(store.stages[stage_index])
    new_weights[dst] = new_w

    new_stage = strip_provenance(replace(stage, nodes=new_nodes))
    new_ir = replace(ir, stages=ir.stages[:stage_index] + (new_stage,) + ir.stages[stage_index + 1 :])
    new_store = WeightStore(
        stem=store.stem,
        stages=store.stages[:stage_index] + [new_weights] + store.stages[stage_index + 1 :],
        head=store.head,
    )
    stats = DamageStats(
        kind="edge",
        stage_index=stage_index,
        element=(src, dst),
        degree_metric=degree,
        downstream=tuple(sorted(set(downstream))),
    )
    return new_ir, new_store, stats


def removable_nodes(ir: NetworkIR) -> list[NodeRemoval]:
    out: list[NodeRemoval] = []
    for i, stage in enumerate(ir.stages):
        for node in stage.internal_nodes():
            out.append(("node", i, node.id))
    return out


def removable_edges(ir: NetworkIR) -> list[EdgeRemoval]:
    out: list[EdgeRemoval] = []
    for i, stage in enumerate(ir.stages):
        for src, dst in stage.internal_edges():
            out.append(("edge", i, src, dst))
    return out


def edge_drop_mask(ir: NetworkIR, p: float, rng: random.Random) -> tuple[tuple[int, int, int], ...]:
    """Training-time mask: with probability p, one eligible edge is dropped.

    Eligible edges are internal edges whose target aggregates more than one
    input. Returns () or a single (stage_index, src, dst) triple.
    """
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"drop probability must be in [0,1], got {p}")
    if p == 0.0 or rng.random() >= p:
        return ()
    eligible = []
    for i, stage in enumerate(ir.stages):
        for src, dst in stage.internal_edges():
            if len(stage.node_by_id(dst).in_edges) > 1:
                eligible.append((i, src, dst))
    if not eligible:
        return ()
    return (eligible[rng.randrange(len(eligible))],)
