"""Network intermediate representation.

A network is a stem (one or two plain convolutions), a chain of randomly
wired stages, and a classifier head. Stage nodes carry their operation kind,
channel counts, stride and incoming edges; the per-stage undirected graph and
index map are kept as provenance. The JSON schema is versioned and canonical
(sorted keys, two-space indent) so identical networks serialize to identical
bytes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .dag import StageDag
from .errors import SchemaError
from .graphs import GeneratorSpec, UndirectedGraph

SCHEMA_VERSION = 1


class Regime(str, Enum):
    SMALL = "small"
    REGULAR = "regular"


class OpKind(str, Enum):
    SEPARABLE_CONV_3X3 = "separable_conv_3x3"
    REGULAR_CONV_3X3 = "regular_conv_3x3"
    MAXPOOL3X3_CONV1X1 = "maxpool3x3_conv1x1"
    AVGPOOL3X3_CONV1X1 = "avgpool3x3_conv1x1"
    PLAIN_CONV = "plain_conv"
    AGGREGATE_ONLY = "aggregate_only"
    CLASSIFIER_HEAD = "classifier_head"


# transformation kinds an internal stage node may use
NODE_OP_KINDS = (
    OpKind.SEPARABLE_CONV_3X3,
    OpKind.REGULAR_CONV_3X3,
    OpKind.MAXPOOL3X3_CONV1X1,
    OpKind.AVGPOOL3X3_CONV1X1,
)


@dataclass(frozen=True)
class IRNode:
    """One node of a stage: pseudo-nodes included, ids are DAG indices."""

    id: int
    kind: OpKind
    in_channels: int
    out_channels: int
    stride: int
    in_edges: tuple[int, ...]

    @property
    def is_pseudo(self) -> bool:
        return self.kind == OpKind.AGGREGATE_ONLY

    @property
    def has_aggregation_weights(self) -> bool:
        return not self.is_pseudo

    @property
    def aggregation_weight_count(self) -> int:
        return len(self.in_edges) if self.has_aggregation_weights else 0


@dataclass(frozen=True)
class StageIR:
    """A randomly wired stage lowered to typed nodes.

    ``nodes`` holds the internal nodes followed by the input and output
    pseudo-nodes, sorted by id. After damage the node set may have holes; the
    ``dag``/``graph`` provenance is dropped then (set to None).
    """

    name: str
    seed: int
    in_channels: int
    channels: int
    resolution: int  # output resolution of this stage
    n_internal: int
    nodes: tuple[IRNode, ...]
    dag: Optional[StageDag]
    graph: Optional[UndirectedGraph]

    @property
    def input_node(self) -> int:
        return self.n_internal

    @property
    def output_node(self) -> int:
        return self.n_internal + 1

    def node_by_id(self, node_id: int) -> IRNode:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(f"stage {self.name} has no node {node_id}")

    def internal_nodes(self) -> tuple[IRNode, ...]:
        return tuple(n for n in self.nodes if n.id < self.n_internal)

    def internal_edges(self) -> tuple[tuple[int, int], ...]:
        out = []
        for node in self.nodes:
            if node.id >= self.n_internal:
                continue
            for src in node.in_edges:
                if src < self.n_internal:
                    out.append((src, node.id))
        return tuple(sorted(out))

    def out_degree(self, node_id: int) -> int:
        return sum(1 for n in self.nodes for s in n.in_edges if s == node_id)


@dataclass(frozen=True)
class StemConv:
    name: str
    in_channels: int
    out_channels: int
    stride: int
    relu_first: bool  # False for conv1 (Conv-BN), True otherwise


@dataclass(frozen=True)
class HeadIR:
    in_channels: int
    conv_channels: int
    class_count: int


@dataclass(frozen=True)
class NetworkIR:
    regime: Regime
    base_channels: int
    op_kind: OpKind
    input_resolution: int
    class_count: int
    provenance: GeneratorSpec
    stem: tuple[StemConv, ...]
    stages: tuple[StageIR, ...]
    head: HeadIR

    def stage_by_name(self, name: str) -> StageIR:
        for st in self.stages:
            if st.name == name:
                return st
        raise KeyError(name)


def node_semantics(node: IRNode) -> list[tuple]:
    """Ordered operation list a node performs, as (step, detail) tuples.

    Internal nodes aggregate their inputs with sigmoid-mapped learnable
    weights, apply the transformation triplet, and fan the result out as
    identical copies. The input pseudo-node only fans out; the output
    pseudo-node only takes the unweighted mean.
    """
    if node.kind == OpKind.AGGREGATE_ONLY:
        if not node.in_edges:
            return [("fan_out", {})]
        return [("mean", {"inputs": len(node.in_edges)})]

    steps: list[tuple] = [
        ("weighted_sum", {"weights": len(node.in_edges), "positive_via": "sigmoid"}),
        ("relu", {}),
    ]
    conv = {"in_channels": node.in_channels, "out_channels": node.out_channels, "stride": node.stride}
    if node.kind == OpKind.SEPARABLE_CONV_3X3:
        steps.append(("depthwise_conv3x3", {"channels": node.in_channels, "stride": node.stride}))
        steps.append(("conv1x1", {"in_channels": node.in_channels, "out_channels": node.out_channels}))
    elif node.kind == OpKind.REGULAR_CONV_3X3:
        steps.append(("conv3x3", conv))
    elif node.kind == OpKind.MAXPOOL3X3_CONV1X1:
        steps.append(("maxpool3x3", {"stride": node.stride}))
        steps.append(("conv1x1", {"in_channels": node.in_channels, "out_channels": node.out_channels}))
    elif node.kind == OpKind.AVGPOOL3X3_CONV1X1:
        steps.append(("avgpool3x3", {"stride": node.stride}))
        steps.append(("conv1x1", {"in_channels": node.in_channels, "out_channels": node.out_channels}))
    else:
        raise SchemaError(f"node kind {node.kind} has no stage-node semantics")
    steps.append(("batch_norm", {"channels": node.out_channels}))
    steps.append(("fan_out", {}))
    return steps


# ---------------------------------------------------------------------------
# serialization


def canonical_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _node_to_dict(n: IRNode) -> dict:
    return {
        "id": n.id,
        "kind": n.kind.value,
        "in_channels": n.in_channels,
        "out_channels": n.out_channels,
        "stride": n.stride,
        "in_edges": list(n.in_edges),
    }


def _node_from_dict(d: dict) -> IRNode:
    return IRNode(
        id=int(d["id"]),
        kind=OpKind(d["kind"]),
        in_channels=int(d["in_channels"]),
        out_channels=int(d["out_channels"]),
        stride=int(d["stride"]),
        in_edges=tuple(int(x) for x in d["in_edges"]),
    )


def _stage_to_dict(st: StageIR) -> dict:
    d = {
        "name": st.name,
        "seed": st.seed,
        "in_channels": st.in_channels,
        "channels": st.channels,
        "resolution": st.resolution,
        "n_internal": st.n_internal,
        "nodes": [_node_to_dict(n) for n in st.nodes],
    }
    if st.dag is not None:
        d["index_map"] = list(st.dag.index_map)
    if st.graph is not None:
        d["graph"] = st.graph.to_json_dict()
    return d


def _stage_from_dict(d: dict) -> StageIR:
    nodes = tuple(sorted((_node_from_dict(x) for x in d["nodes"]), key=lambda n: n.id))
    n_internal = int(d["n_internal"])
    graph = UndirectedGraph.from_json_dict(d["graph"]) if "graph" in d else None
    dag = None
    if graph is not None and "index_map" in d:
        index_map = tuple(int(x) for x in d["index_map"])
        edges = []
        in_deg = [0] * n_internal
        out_deg = [0] * n_internal
        for u, v in graph.edges:
            iu, iv = index_map[u], index_map[v]
            src, dst = (iu, iv) if iu < iv else (iv, iu)
            edges.append((src, dst))
            out_deg[src] += 1
            in_deg[dst] += 1
        dag = StageDag(
            n_internal=n_internal,
            edges=tuple(sorted(edges)),
            original_inputs=tuple(v for v in range(n_internal) if in_deg[v] == 0),
            original_outputs=tuple(v for v in range(n_internal) if out_deg[v] == 0),
            index_map=index_map,
        )
    return StageIR(
        name=d["name"],
        seed=int(d["seed"]),
        in_channels=int(d["in_channels"]),
        channels=int(d["channels"]),
        resolution=int(d["resolution"]),
        n_internal=n_internal,
        nodes=nodes,
        dag=dag,
        graph=graph,
    )


def ir_to_dict(ir: NetworkIR) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "regime": ir.regime.value,
        "base_channels": ir.base_channels,
        "op_kind": ir.op_kind.value,
        "input_resolution": ir.input_resolution,
        "class_count": ir.class_count,
        "provenance": ir.provenance.to_json_dict(),
        "stem": [
            {
                "name": s.name,
                "in_channels": s.in_channels,
                "out_channels": s.out_channels,
                "stride": s.stride,
                "relu_first": s.relu_first,
            }
            for s in ir.stem
        ],
        "stages": [_stage_to_dict(st) for st in ir.stages],
        "head": {
            "in_channels": ir.head.in_channels,
            "conv_channels": ir.head.conv_channels,
            "class_count": ir.head.class_count,
        },
    }


def ir_from_dict(d: dict) -> NetworkIR:
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported IR schema version {version!r} (expected {SCHEMA_VERSION})")
    try:
        return NetworkIR(
            regime=Regime(d["regime"]),
            base_channels=int(d["base_channels"]),
            op_kind=OpKind(d["op_kind"]),
            input_resolution=int(d["input_resolution"]),
            class_count=int(d["class_count"]),
            provenance=GeneratorSpec.from_json_dict(d["provenance"]),
            stem=tuple(
                StemConv(
                    name=s["name"],
                    in_channels=int(s["in_channels"]),
                    out_channels=int(s["out_channels"]),
                    stride=int(s["stride"]),
                    relu_first=bool(s["relu_first"]),
                )
                for s in d["stem"]
            ),
            stages=tuple(_stage_from_dict(s) for s in d["stages"]),
            head=HeadIR(
                in_channels=int(d["head"]["in_channels"]),
                conv_channels=int(d["head"]["conv_channels"]),
                class_count=int(d["head"]["class_count"]),
            ),
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed IR document: {exc}") from exc


def ir_to_json(ir: NetworkIR) -> str:
    return canonical_json(ir_to_dict(ir))


def ir_from_json(text: str) -> NetworkIR:
    return ir_from_dict(json.loads(text))


def strip_provenance(stage: StageIR) -> StageIR:
    """Drop dag/graph provenance (used after damage edits)."""
    return replace(stage, dag=None, graph=None)
