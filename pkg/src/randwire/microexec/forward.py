"""Reference forward pass for NetworkIR at toy sizes.

Naive numpy execution in float64 (aggregations and means accumulate at
64-bit); convolutions use im2col + matmul. Every kernel also accepts complex
inputs so that complex-step differentiation can drive the whole network (ReLU
gates on the real part, max-pooling selects by the real part, batch-norm
variance is computed without conjugation).
"""
from __future__ import annotations

import warnings
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from ..errors import NonFiniteError, ParameterError
from ..ir import NetworkIR, OpKind, StageIR
from .values import TensorValue
from .weights import BNState, NodeWeights, WeightStore

BN_EPS = 1e-5

ArrayLike = Union[np.ndarray, TensorValue]
EdgeRef = tuple[int, int, int]  # (stage_index, src, dst)


def relu(x: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(x):
        return x * (x.real > 0)
    return np.maximum(x, 0.0)


def sigmoid(x):
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return 1.0 / (1.0 + np.exp(-x))
    # overflow-free for arbitrarily large |x|
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _pad(x: np.ndarray, p: int) -> np.ndarray:
    if p == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))


def _window_view(x: np.ndarray, k: int, stride: int) -> np.ndarray:
    """(B, C, Ho, Wo, k, k) sliding windows of a padded (B, C, H, W) array."""
    b, c, h, w = x.shape
    ho = (h - k) // stride + 1
    wo = (w - k) // stride + 1
    sb, sc, sh, sw = x.strides
    return np.lib.stride_tricks.as_strided(
        x,
        shape=(b, c, ho, wo, k, k),
        strides=(sb, sc, sh * stride, sw * stride, sh, sw),
        writeable=False,
    )


def conv3x3(x: np.ndarray, weight: np.ndarray, stride: int = 1) -> np.ndarray:
    """3x3 convolution, padding 1, no bias. weight: (Cout, Cin, 3, 3)."""
    win = _window_view(_pad(x, 1), 3, stride)  # (B, Cin, Ho, Wo, 3, 3)
    return np.einsum("bihwkl,oikl->bohw", win, weight, optimize=True)


def depthwise3x3(x: np.ndarray, weight: np.ndarray, stride: int = 1) -> np.ndarray:
    """Per-channel 3x3 convolution, padding 1. weight: (C, 3, 3)."""
    win = _window_view(_pad(x, 1), 3, stride)
    return np.einsum("bchwkl,ckl->bchw", win, weight, optimize=True)


def conv1x1(x: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """Pointwise convolution. weight: (Cout, Cin)."""
    return np.einsum("bihw,oi->bohw", x, weight, optimize=True)


def maxpool3x3(x: np.ndarray, stride: int) -> np.ndarray:
    win = _window_view(_pad(x, 1), 3, stride)
    b, c, ho, wo = win.shape[:4]
    flat = win.reshape(b, c, ho, wo, 9)
    if np.iscomplexobj(flat):
        idx = np.argmax(flat.real, axis=-1)
        return np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
    return flat.max(axis=-1)


def avgpool3x3(x: np.ndarray, stride: int) -> np.ndarray:
    win = _window_view(_pad(x, 1), 3, stride)
    b, c, ho, wo = win.shape[:4]
    return win.reshape(b, c, ho, wo, 9).mean(axis=-1)


def batch_norm(x: np.ndarray, bn: BNState, mode: str) -> np.ndarray:
    """Normalize per channel; batch statistics in train mode (batch >= 2)."""
    if mode == "train" and x.shape[0] >= 2:
        mean = x.mean(axis=(0, 2, 3))
        var = ((x - mean[None, :, None, None]) ** 2).mean(axis=(0, 2, 3))
    else:
        if mode == "train":
            warnings.warn("batch of 1 in train mode: falling back to running statistics")
        mean, var = bn.mean, bn.var
    inv = 1.0 / np.sqrt(var + BN_EPS)
    scale = bn.gamma * inv
    shift = bn.beta - mean * scale
    return x * scale[None, :, None, None] + shift[None, :, None, None]


def _check_finite(x: np.ndarray, where: str) -> None:
    if not np.isfinite(x).all():
        raise NonFiniteError(f"non-finite activation at {where}")


_KERNEL_SHAPES = {
    OpKind.SEPARABLE_CONV_3X3: lambda cin, cout: {"depthwise": (cin, 3, 3), "pointwise": (cout, cin)},
    OpKind.REGULAR_CONV_3X3: lambda cin, cout: {"conv": (cout, cin, 3, 3)},
    OpKind.MAXPOOL3X3_CONV1X1: lambda cin, cout: {"pointwise": (cout, cin)},
    OpKind.AVGPOOL3X3_CONV1X1: lambda cin, cout: {"pointwise": (cout, cin)},
}


def validate_store(ir: NetworkIR, store: WeightStore) -> None:
    """Check the store holds every tensor the IR needs, with the right shape."""

    def expect(cond: bool, what: str) -> None:
        if not cond:
            raise ParameterError(f"weight store mismatch: {what}")

    expect(len(store.stem) == len(ir.stem), "stem layer count")
    for s, w in zip(ir.stem, store.stem):
        expect(w.conv.shape == (s.out_channels, s.in_channels, 3, 3), f"stem {s.name} conv shape")
        expect(w.bn.gamma.shape == (s.out_channels,), f"stem {s.name} bn shape")
    expect(len(store.stages) == len(ir.stages), "stage count")
    for i, stage in enumerate(ir.stages):
        for node in stage.nodes:
            if node.is_pseudo:
                continue
            if node.id not in store.stages[i]:
                raise ParameterError(f"missing weights for {stage.name}/{node.id}")
            w = store.stages[i][node.id]
            expect(w.agg_raw is not None and w.agg_raw.shape == (len(node.in_edges),),
                   f"{stage.name}/{node.id} aggregation weight count")
            wanted = _KERNEL_SHAPES[node.kind](node.in_channels, node.out_channels)
            for role, shape in wanted.items():
                expect(role in w.kernels and w.kernels[role].shape == shape,
                       f"{stage.name}/{node.id} {role} kernel shape")
            expect(w.bn is not None and w.bn.gamma.shape == (node.out_channels,),
                   f"{stage.name}/{node.id} bn shape")
    head = ir.head
    expect(store.head.conv.shape == (head.conv_channels, head.in_channels), "head conv shape")
    expect(store.head.fc.shape == (head.class_count, head.conv_channels), "fc shape")
    expect(store.head.fc_bias.shape == (head.class_count,), "fc bias shape")


def _node_transform(node_kind: OpKind, w: NodeWeights, x: np.ndarray, stride: int, mode: str) -> np.ndarray:
    x = relu(x)
    if node_kind == OpKind.SEPARABLE_CONV_3X3:
        x = depthwise3x3(x, w.kernels["depthwise"], stride)
        x = conv1x1(x, w.kernels["pointwise"])
    elif node_kind == OpKind.REGULAR_CONV_3X3:
        x = conv3x3(x, w.kernels["conv"], stride)
    elif node_kind == OpKind.MAXPOOL3X3_CONV1X1:
        x = maxpool3x3(x, stride)
        x = conv1x1(x, w.kernels["pointwise"])
    elif node_kind == OpKind.AVGPOOL3X3_CONV1X1:
        x = avgpool3x3(x, stride)
        x = conv1x1(x, w.kernels["pointwise"])
    else:
        raise ParameterError(f"cannot execute node kind {node_kind}")
    return batch_norm(x, w.bn, mode)


def run_stage(
    stage: StageIR,
    stage_index: int,
    store: WeightStore,
    stage_input: np.ndarray,
    mode: str,
    dropped_edges: frozenset[EdgeRef],
    check: bool,
    trace: Optional[dict] = None,
) -> np.ndarray:
    values: dict[int, np.ndarray] = {stage.input_node: stage_input}
    in_res = stage_input.shape[-1]
    output_value: Optional[np.ndarray] = None

    for node in stage.nodes:  # nodes are sorted by id == topological order
        if node.id == stage.input_node:
            continue
        if node.id == stage.output_node:
            inputs = [values[src] for src in node.in_edges if src in values]
            if not inputs:
                raise ParameterError(f"stage {stage.name} output node has no inputs")
            output_value = sum(inputs[1:], start=inputs[0]) / len(inputs)
            if check:
                _check_finite(output_value, f"{stage.name}/output")
            continue

        w = store.node(stage_index, node.id)
        kept = [src for src in node.in_edges if (stage_index, src, node.id) not in dropped_edges]
        if kept:
            coeff = sigmoid(w.agg_raw)
            agg = None
            for pos, src in enumerate(node.in_edges):
                if src not in values or (stage_index, src, node.id) in dropped_edges:
                    continue
                term = coeff[pos] * values[src]
                agg = term if agg is None else agg + term
        else:
            agg = None
        if agg is None:
            # orphaned node (after damage / full drop): zero input, as-is policy
            res = in_res if node.stride == 2 else stage.resolution
            agg = np.zeros((stage_input.shape[0], node.in_channels, res, res), dtype=stage_input.dtype)

        out = _node_transform(node.kind, w, agg, node.stride, mode)
        if check:
            _check_finite(out, f"{stage.name}/{node.id}")
        values[node.id] = out

    assert output_value is not None
    if trace is not None:
        for node_id, value in values.items():
            trace[(stage_index, node_id)] = value
        trace[(stage_index, stage.output_node)] = output_value
    return output_value


def forward(
    ir: NetworkIR,
    store: WeightStore,
    x: Union[ArrayLike, Sequence[ArrayLike]],
    mode: str = "eval",
    dropped_edges: Iterable[EdgeRef] = (),
    trace: Optional[dict] = None,
) -> np.ndarray:
    """Execute the network; returns pre-softmax class scores.

    ``x`` is a single (C,H,W) tensor or a batch of them; a single input yields
    a (class_count,) score vector, a batch a (B, class_count) matrix.
    ``dropped_edges`` names stage-internal edges to skip during aggregation
    (no re-normalization of the remaining weights). When ``trace`` is a dict
    it is filled with every node's output, keyed by (stage_index, node_id).
    The store must not be mutated by another thread during the call.
    """
    if mode not in ("eval", "train"):
        raise ParameterError(f"mode must be 'eval' or 'train', got {mode!r}")

    single = False
    if isinstance(x, TensorValue):
        x = x.to_array()
    if isinstance(x, np.ndarray) and x.ndim == 3:
        single = True
        batch = x[None]
    elif isinstance(x, np.ndarray) and x.ndim == 4:
        batch = x
    else:
        arrays = [v.to_array() if isinstance(v, TensorValue) else np.asarray(v) for v in x]
        batch = np.stack(arrays)
    if not np.iscomplexobj(batch):
        batch = batch.astype(np.float64)

    expected = ir.input_resolution
    if batch.shape[1] != 3 or batch.shape[2] != expected or batch.shape[3] != expected:
        raise ParameterError(
            f"input shape {batch.shape[1:]} does not match (3, {expected}, {expected})"
        )
    validate_store(ir, store)

    check = not np.iscomplexobj(batch)
    if check:
        _check_finite(batch, "input")

    drop = frozenset(dropped_edges)

    value = batch
    for s, w in zip(ir.stem, store.stem):
        if s.relu_first:
            value = relu(value)
        value = conv3x3(value, w.conv, s.stride)
        value = batch_norm(value, w.bn, mode)
        if check:
            _check_finite(value, f"stem/{s.name}")

    for i, stage in enumerate(ir.stages):
        value = run_stage(stage, i, store, value, mode, drop, check, trace)

    value = relu(value)
    value = conv1x1(value, store.head.conv)
    value = batch_norm(value, store.head.bn, mode)
    pooled = value.mean(axis=(2, 3))
    scores = pooled @ store.head.fc.T + store.head.fc_bias
    if check:
        _check_finite(scores, "head/fc")
    return scores[0] if single else scores
