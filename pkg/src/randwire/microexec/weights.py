"""Weight storage for the reference interpreter.

Layouts (all float64 numpy arrays):

- raw aggregation weights: one per in-edge, aligned with the node's
  ``in_edges`` order, pre-sigmoid;
- separable conv: ``depthwise`` (Cin, 3, 3) and ``pointwise`` (Cout, Cin);
- regular conv: ``conv`` (Cout, Cin, 3, 3);
- pool-based nodes: ``pointwise`` (Cout, Cin) only;
- stem convs: (Cout, Cin, 3, 3); head: ``conv`` (1280, Cin) 1x1, ``fc``
  (classes, 1280) plus ``fc_bias`` (classes,);
- batch norm: gamma/beta (learned) and running mean/var (statistics).

The JSON export is versioned and mirrors this structure so other executors
can produce compatible weights.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import SchemaError
from ..ir import IRNode, NetworkIR, OpKind

WEIGHTS_SCHEMA_VERSION = 1


@dataclass
class BNState:
    gamma: np.ndarray
    beta: np.ndarray
    mean: np.ndarray
    var: np.ndarray

    @classmethod
    def identity(cls, channels: int) -> "BNState":
        return cls(
            gamma=np.ones(channels),
            beta=np.zeros(channels),
            mean=np.zeros(channels),
            var=np.ones(channels),
        )


@dataclass
class NodeWeights:
    agg_raw: Optional[np.ndarray] = None
    kernels: dict[str, np.ndarray] = field(default_factory=dict)
    bn: Optional[BNState] = None


@dataclass
class StemWeights:
    conv: np.ndarray
    bn: BNState


@dataclass
class HeadWeights:
    conv: np.ndarray
    bn: BNState
    fc: np.ndarray
    fc_bias: np.ndarray


@dataclass
class WeightStore:
    stem: list[StemWeights]
    stages: list[dict[int, NodeWeights]]
    head: HeadWeights

    def node(self, stage_index: int, node_id: int) -> NodeWeights:
        return self.stages[stage_index][node_id]


def _uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    # He-style uniform: keeps activation magnitudes stable through depth
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


def _init_node(rng: np.random.Generator, node: IRNode) -> NodeWeights:
    kernels: dict[str, np.ndarray] = {}
    cin, cout = node.in_channels, node.out_channels
    if node.kind == OpKind.SEPARABLE_CONV_3X3:
        kernels["depthwise"] = _uniform(rng, (cin, 3, 3), 9)
        kernels["pointwise"] = _uniform(rng, (cout, cin), cin)
    elif node.kind == OpKind.REGULAR_CONV_3X3:
        kernels["conv"] = _uniform(rng, (cout, cin, 3, 3), 9 * cin)
    elif node.kind in (OpKind.MAXPOOL3X3_CONV1X1, OpKind.AVGPOOL3X3_CONV1X1):
        kernels["pointwise"] = _uniform(rng, (cout, cin), cin)
    else:
        raise SchemaError(f"no weights for node kind {node.kind}")
    return NodeWeights(
        agg_raw=np.zeros(len(node.in_edges)),
        kernels=kernels,
        bn=BNState.identity(cout),
    )


def init_weights(ir: NetworkIR, seed: int = 0) -> WeightStore:
    """Deterministic test-weight scheme: seeded uniform scaled by fan-in.

    Raw aggregation weights start at zero (sigmoid 0.5); BN starts as the
    identity transform. Generation order is fixed: stem convs, then stages in
    order with nodes ascending, then the head.
    """
    rng = np.random.default_rng(seed)
    stem = [
        StemWeights(
            conv=_uniform(rng, (s.out_channels, s.in_channels, 3, 3), 9 * s.in_channels),
            bn=BNState.identity(s.out_channels),
        )
        for s in ir.stem
    ]
    stages = []
    for stage in ir.stages:
        per_node: dict[int, NodeWeights] = {}
        for node in stage.nodes:
            if node.is_pseudo:
                continue
            per_node[node.id] = _init_node(rng, node)
        stages.append(per_node)
    head = HeadWeights(
        conv=_uniform(rng, (ir.head.conv_channels, ir.head.in_channels), ir.head.in_channels),
        bn=BNState.identity(ir.head.conv_channels),
        fc=_uniform(rng, (ir.head.class_count, ir.head.conv_channels), ir.head.conv_channels),
        fc_bias=np.zeros(ir.head.class_count),
    )
    return WeightStore(stem=stem, stages=stages, head=head)


# ---------------------------------------------------------------------------
# serialization


def _bn_to_dict(bn: BNState) -> dict:
    return {
        "gamma": bn.gamma.tolist(),
        "beta": bn.beta.tolist(),
        "mean": bn.mean.tolist(),
        "var": bn.var.tolist(),
    }


def _bn_from_dict(d: dict) -> BNState:
    return BNState(
        gamma=np.asarray(d["gamma"], dtype=np.float64),
        beta=np.asarray(d["beta"], dtype=np.float64),
        mean=np.asarray(d["mean"], dtype=np.float64),
        var=np.asarray(d["var"], dtype=np.float64),
    )


def store_to_dict(store: WeightStore) -> dict:
    return {
        "schema_version": WEIGHTS_SCHEMA_VERSION,
        "stem": [{"conv": s.conv.tolist(), "bn": _bn_to_dict(s.bn)} for s in store.stem],
        "stages": [
            {
                str(node_id): {
                    "agg_raw": w.agg_raw.tolist() if w.agg_raw is not None else None,
                    "kernels": {role: k.tolist() for role, k in w.kernels.items()},
                    "bn": _bn_to_dict(w.bn) if w.bn is not None else None,
                }
                for node_id, w in sorted(per_node.items())
            }
            for per_node in store.stages
        ],
        "head": {
            "conv": store.head.conv.tolist(),
            "bn": _bn_to_dict(store.head.bn),
            "fc": store.head.fc.tolist(),
            "fc_bias": store.head.fc_bias.tolist(),
        },
    }


def store_from_dict(d: dict) -> WeightStore:
    version = d.get("schema_version")
    if version != WEIGHTS_SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported weights schema version {version!r} (expected {WEIGHTS_SCHEMA_VERSION})"
        )
    stem = [
        StemWeights(conv=np.asarray(s["conv"], dtype=np.float64), bn=_bn_from_dict(s["bn"]))
        for s in d["stem"]
    ]
    stages = []
    for per_node in d["stages"]:
        loaded: dict[int, NodeWeights] = {}
        for node_id, w in per_node.items():
            loaded[int(node_id)] = NodeWeights(
                agg_raw=None if w["agg_raw"] is None else np.asarray(w["agg_raw"], dtype=np.float64),
                kernels={role: np.asarray(k, dtype=np.float64) for role, k in w["kernels"].items()},
                bn=None if w["bn"] is None else _bn_from_dict(w["bn"]),
            )
        stages.append(loaded)
    head = HeadWeights(
        conv=np.asarray(d["head"]["conv"], dtype=np.float64),
        bn=_bn_from_dict(d["head"]["bn"]),
        fc=np.asarray(d["head"]["fc"], dtype=np.float64),
        fc_bias=np.asarray(d["head"]["fc_bias"], dtype=np.float64),
    )
    return WeightStore(stem=stem, stages=stages, head=head)


def store_to_json(store: WeightStore) -> str:
    return json.dumps(store_to_dict(store), sort_keys=True) + "\n"


def store_from_json(text: str) -> WeightStore:
    return store_from_dict(json.loads(text))
