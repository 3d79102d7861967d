"""Trainable PyTorch model built from a network IR JSON file.

The IR schema is the one emitted by the `randwire` toolchain (version 1);
this module reads the JSON directly so the trainer depends only on the
documented file format. Semantics mirror the reference interpreter: nodes
aggregate their inputs with sigmoid-mapped learnable weights, apply
ReLU -> conv -> BN (convolutions bias-free), and fan the result out; stage
input nodes copy, output nodes average; the head is ReLU -> 1x1 conv -> BN ->
global average pool -> fc.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Optional

import torch
from torch import nn

IR_SCHEMA_VERSION = 1

EdgeRef = tuple[int, int, int]  # (stage_index, src, dst)
NodeRef = tuple[int, int]  # (stage_index, node_id)


class SchemaError(ValueError):
    pass


class StructuralError(RuntimeError):
    pass


def load_ir(path) -> dict:
    doc = json.loads(Path(path).read_text())
    version = doc.get("schema_version")
    if version != IR_SCHEMA_VERSION:
        raise SchemaError(f"unsupported IR schema version {version!r}")
    return doc


def _make_transform(kind: str, cin: int, cout: int, stride: int) -> nn.Module:
    if kind == "separable_conv_3x3":
        return nn.Sequential(
            nn.Conv2d(cin, cin, 3, stride=stride, padding=1, groups=cin, bias=False),
            nn.Conv2d(cin, cout, 1, bias=False),
        )
    if kind == "regular_conv_3x3":
        return nn.Conv2d(cin, cout, 3, stride=stride, padding=1, bias=False)
    if kind == "maxpool3x3_conv1x1":
        return nn.Sequential(
            nn.MaxPool2d(3, stride=stride, padding=1),
            nn.Conv2d(cin, cout, 1, bias=False),
        )
    if kind == "avgpool3x3_conv1x1":
        return nn.Sequential(
            nn.AvgPool2d(3, stride=stride, padding=1),
            nn.Conv2d(cin, cout, 1, bias=False),
        )
    raise SchemaError(f"unknown node kind {kind!r}")


class NodeUnit(nn.Module):
    """One internal stage node: weighted-sum aggregation, ReLU-conv-BN."""

    def __init__(self, node: dict):
        super().__init__()
        self.node_id = node["id"]
        self.in_edges = [int(s) for s in node["in_edges"]]
        self.agg_raw = nn.Parameter(torch.zeros(len(self.in_edges)))
        self.transform = _make_transform(
            node["kind"], node["in_channels"], node["out_channels"], node["stride"]
        )
        self.bn = nn.BatchNorm2d(node["out_channels"])
        self.in_channels = node["in_channels"]
        self.stride = node["stride"]

    def forward(self, inputs: list[Optional[torch.Tensor]], template: torch.Tensor,
                in_resolution: int, out_resolution: int) -> torch.Tensor:
        coeff = torch.sigmoid(self.agg_raw)
        agg = None
        for pos, value in enumerate(inputs):
            if value is None:
                continue
            term = coeff[pos] * value
            agg = term if agg is None else agg + term
        if agg is None:
            res = in_resolution if self.stride == 2 else out_resolution
            agg = template.new_zeros((template.shape[0], self.in_channels, res, res))
        return self.bn(self.transform(torch.relu(agg)))


class StageBlock(nn.Module):
    def __init__(self, stage: dict):
        super().__init__()
        self.name = stage["name"]
        self.n_internal = stage["n_internal"]
        self.input_node = self.n_internal
        self.output_node = self.n_internal + 1
        self.resolution = stage["resolution"]
        internal = [n for n in stage["nodes"] if n["id"] < self.n_internal]
        self.units = nn.ModuleDict({str(n["id"]): NodeUnit(n) for n in internal})
        out_doc = next(n for n in stage["nodes"] if n["id"] == self.output_node)
        self.output_inputs = [int(s) for s in out_doc["in_edges"]]

    def forward(self, x: torch.Tensor, stage_index: int,
                dropped_edges: frozenset[EdgeRef], removed_nodes: frozenset[NodeRef]) -> torch.Tensor:
        # runtime resolutions, so orphaned-node zero tensors match any input size
        in_resolution = x.shape[-1]
        out_resolution = (in_resolution - 1) // 2 + 1
        values: dict[int, Optional[torch.Tensor]] = {self.input_node: x}
        for key in sorted(self.units, key=int):
            node_id = int(key)
            if (stage_index, node_id) in removed_nodes:
                values[node_id] = None
                continue
            unit = self.units[key]
            inputs = [
                None
                if (src not in values or values[src] is None
                    or (stage_index, src, node_id) in dropped_edges)
                else values[src]
                for src in unit.in_edges
            ]
            values[node_id] = unit(inputs, x, in_resolution, out_resolution)
        members = [
            values[src]
            for src in self.output_inputs
            if values.get(src) is not None
        ]
        if not members:
            raise StructuralError(f"stage {self.name}: output node has no live inputs")
        return sum(members[1:], start=members[0]) / len(members)


class RandWireNet(nn.Module):
    """Full network: stem, randomly wired stages, classifier head."""

    def __init__(self, ir: dict, class_count: Optional[int] = None):
        super().__init__()
        self.ir = ir
        self.input_resolution = ir["input_resolution"]
        stem_layers = []
        for s in ir["stem"]:
            block = [
                nn.Conv2d(s["in_channels"], s["out_channels"], 3, stride=s["stride"],
                          padding=1, bias=False),
                nn.BatchNorm2d(s["out_channels"]),
            ]
            if s["relu_first"]:
                block.insert(0, nn.ReLU())
            stem_layers.append(nn.Sequential(*block))
        self.stem = nn.ModuleList(stem_layers)
        self.stages = nn.ModuleList(StageBlock(st) for st in ir["stages"])
        head = ir["head"]
        self.class_count = class_count if class_count is not None else head["class_count"]
        self.head_conv = nn.Conv2d(head["in_channels"], head["conv_channels"], 1, bias=False)
        self.head_bn = nn.BatchNorm2d(head["conv_channels"])
        self.fc = nn.Linear(head["conv_channels"], self.class_count)
        for m in self.modules():
            if isinstance(m, nn.Conv2d):
                nn.init.kaiming_normal_(m.weight, mode="fan_out", nonlinearity="relu")

    def forward(self, x: torch.Tensor, dropped_edges: Iterable[EdgeRef] = (),
                removed_nodes: Iterable[NodeRef] = ()) -> torch.Tensor:
        dropped = frozenset(dropped_edges)
        removed = frozenset(removed_nodes)
        for block in self.stem:
            x = block(x)
        for i, stage in enumerate(self.stages):
            x = stage(x, i, dropped, removed)
        x = self.head_bn(self.head_conv(torch.relu(x)))
        x = x.mean(dim=(2, 3))
        return self.fc(x)


def build_model(ir_path, class_count: Optional[int] = None) -> RandWireNet:
    return RandWireNet(load_ir(ir_path), class_count=class_count)


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def internal_edges(ir: dict) -> list[EdgeRef]:
    out = []
    for si, stage in enumerate(ir["stages"]):
        n_internal = stage["n_internal"]
        for node in stage["nodes"]:
            if node["id"] >= n_internal:
                continue
            for src in node["in_edges"]:
                if src < n_internal:
                    out.append((si, int(src), int(node["id"])))
    return out


def internal_nodes(ir: dict) -> list[NodeRef]:
    out = []
    for si, stage in enumerate(ir["stages"]):
        for node in stage["nodes"]:
            if node["id"] < stage["n_internal"]:
                out.append((si, int(node["id"])))
    return out


def node_degrees(ir: dict) -> dict[NodeRef, tuple[int, int]]:
    """(in_degree, out_degree) per internal node, pseudo edges included."""
    degrees = {}
    for si, stage in enumerate(ir["stages"]):
        out_deg = {n["id"]: 0 for n in stage["nodes"]}
        for n in stage["nodes"]:
            for src in n["in_edges"]:
                out_deg[int(src)] += 1
        for n in stage["nodes"]:
            if n["id"] < stage["n_internal"]:
                degrees[(si, int(n["id"]))] = (len(n["in_edges"]), out_deg[n["id"]])
    return degrees
