"""Export trained weights in the reference interpreter's store format."""
from __future__ import annotations

import json
from pathlib import Path

import torch
from torch import nn

from .ir_model import RandWireNet, SchemaError

WEIGHTS_SCHEMA_VERSION = 1


def _bn_dict(bn: nn.BatchNorm2d) -> dict:
    return {
        "gamma": bn.weight.detach().tolist(),
        "beta": bn.bias.detach().tolist(),
        "mean": bn.running_mean.tolist(),
        "var": bn.running_var.tolist(),
    }


def _node_kernels(unit) -> dict:
    t = unit.transform
    if isinstance(t, nn.Conv2d):  # regular 3x3
        return {"conv": t.weight.detach().tolist()}
    layers = list(t.children())
    if isinstance(layers[0], nn.Conv2d) and layers[0].groups > 1:  # separable
        depthwise = layers[0].weight.detach().squeeze(1)  # (C,1,3,3) -> (C,3,3)
        pointwise = layers[1].weight.detach().squeeze(-1).squeeze(-1)
        return {"depthwise": depthwise.tolist(), "pointwise": pointwise.tolist()}
    if isinstance(layers[0], (nn.MaxPool2d, nn.AvgPool2d)):
        pointwise = layers[1].weight.detach().squeeze(-1).squeeze(-1)
        return {"pointwise": pointwise.tolist()}
    raise SchemaError(f"cannot export transform {t}")


def export_store(model: RandWireNet) -> dict:
    stem = []
    for block in model.stem:
        layers = list(block.children())
        conv = next(m for m in layers if isinstance(m, nn.Conv2d))
        bn = next(m for m in layers if isinstance(m, nn.BatchNorm2d))
        stem.append({"conv": conv.weight.detach().tolist(), "bn": _bn_dict(bn)})

    stages = []
    for stage in model.stages:
        per_node = {}
        for key in sorted(stage.units, key=int):
            unit = stage.units[key]
            per_node[key] = {
                "agg_raw": unit.agg_raw.detach().tolist(),
                "kernels": _node_kernels(unit),
                "bn": _bn_dict(unit.bn),
            }
        stages.append(per_node)

    head = {
        "conv": model.head_conv.weight.detach().squeeze(-1).squeeze(-1).tolist(),
        "bn": _bn_dict(model.head_bn),
        "fc": model.fc.weight.detach().tolist(),
        "fc_bias": model.fc.bias.detach().tolist(),
    }
    return {"schema_version": WEIGHTS_SCHEMA_VERSION, "stem": stem, "stages": stages, "head": head}


def export_weights(model: RandWireNet, path) -> Path:
    path = Path(path)
    with torch.no_grad():
        doc = export_store(model)
    path.write_text(json.dumps(doc, sort_keys=True) + "\n")
    return path
