"""Numerical gradient verification for the reference interpreter.

Two independent schemes are compared for each sampled weight: central finite
differences (step ``eps``) and complex-step differentiation (step 1e-30,
immune to subtractive cancellation). Agreement within the tolerance validates
that the forward semantics define a smooth, learnable computation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import NonFiniteError
from ..ir import NetworkIR
from .forward import forward
from .weights import WeightStore

COMPLEX_STEP = 1e-30


@dataclass(frozen=True)
class GradSample:
    path: str
    flat_index: int
    central: float
    reference: float
    rel_error: float


@dataclass(frozen=True)
class GradCheckReport:
    samples: tuple[GradSample, ...]
    max_rel_error: float
    eps: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.max_rel_error < self.tol


def _parameter_arrays(store: WeightStore) -> list[tuple[str, np.ndarray]]:
    """All differentiable arrays, in a fixed documented order."""
    out: list[tuple[str, np.ndarray]] = []
    for i, s in enumerate(store.stem):
        out.append((f"stem/{i}/conv", s.conv))
    for si, per_node in enumerate(store.stages):
        for node_id in sorted(per_node):
            w = per_node[node_id]
            if w.agg_raw is not None and w.agg_raw.size:
                out.append((f"stage{si}/{node_id}/agg_raw", w.agg_raw))
            for role in sorted(w.kernels):
                out.append((f"stage{si}/{node_id}/{role}", w.kernels[role]))
    out.append(("head/conv", store.head.conv))
    out.append(("head/fc", store.head.fc))
    return out


def mse_loss(target: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """0.5 * sum((scores - target)^2), analytic in the complex-step sense."""

    def loss(scores: np.ndarray):
        d = scores - target
        return 0.5 * (d * d).sum()

    return loss


def grad_check(
    ir: NetworkIR,
    store: WeightStore,
    x: np.ndarray,
    n_samples: int = 50,
    eps: float = 1e-4,
    tol: float = 1e-3,
    seed: int = 0,
    loss: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    mode: str = "eval",
    path_filter: Optional[str] = None,
) -> GradCheckReport:
    """Compare central differences against complex-step for sampled weights.

    ``path_filter`` restricts sampling to arrays whose path contains the
    substring (e.g. "agg_raw" to target only raw aggregation weights).
    """
    rng = np.random.default_rng(seed)
    if loss is None:
        target = rng.normal(size=ir.class_count)
        loss = mse_loss(target)

    def evaluate() -> complex:
        return complex(loss(forward(ir, store, x, mode=mode)))

    base = evaluate()
    if not np.isfinite(base.real):
        raise NonFiniteError("loss is non-finite at the evaluation point")

    arrays = _parameter_arrays(store)
    if path_filter is not None:
        arrays = [(p, a) for p, a in arrays if path_filter in p]
        if not arrays:
            raise NonFiniteError(f"no parameter arrays match filter {path_filter!r}")
    sizes = np.array([a.size for _, a in arrays])
    total = int(sizes.sum())
    picks = rng.choice(total, size=min(n_samples, total), replace=False)
    bounds = np.cumsum(sizes)

    samples = []
    for pick in sorted(int(p) for p in picks):
        ai = int(np.searchsorted(bounds, pick, side="right"))
        offset = pick - (0 if ai == 0 else int(bounds[ai - 1]))
        path, arr = arrays[ai]
        original = arr.flat[offset]

        arr.flat[offset] = original + eps
        plus = evaluate().real
        arr.flat[offset] = original - eps
        minus = evaluate().real
        arr.flat[offset] = original
        central = (plus - minus) / (2.0 * eps)

        carr = arr.astype(np.complex128)
        carr.flat[offset] = original + 1j * COMPLEX_STEP
        _swap_array(store, path, carr)
        reference = evaluate().imag / COMPLEX_STEP
        _swap_array(store, path, arr)

        scale = max(abs(central), abs(reference))
        rel = 0.0 if scale < 1e-10 else abs(central - reference) / scale
        samples.append(
            GradSample(path=path, flat_index=offset, central=central, reference=reference, rel_error=rel)
        )

    max_rel = max(s.rel_error for s in samples) if samples else 0.0
    return GradCheckReport(samples=tuple(samples), max_rel_error=max_rel, eps=eps, tol=tol)


def complex_step_grad(ir: NetworkIR, store: WeightStore, x: np.ndarray, path: str, flat_index: int,
                      loss: Callable[[np.ndarray], np.ndarray], mode: str = "eval") -> float:
    """Single-weight gradient via complex step (used for saturation checks)."""
    arrays = dict(_parameter_arrays(store))
    arr = arrays[path]
    original = arr.flat[flat_index]
    carr = arr.astype(np.complex128)
    carr.flat[flat_index] = original + 1j * COMPLEX_STEP
    _swap_array(store, path, carr)
    value = complex(loss(forward(ir, store, x, mode=mode))).imag / COMPLEX_STEP
    _swap_array(store, path, arr)
    return value


def _swap_array(store: WeightStore, path: str, new: np.ndarray) -> None:
    parts = path.split("/")
    if parts[0] == "stem":
        store.stem[int(parts[1])].conv = new
    elif parts[0] == "head":
        if parts[1] == "conv":
            store.head.conv = new
        else:
            store.head.fc = new
    else:
        stage_index = int(parts[0].removeprefix("stage"))
        node = store.stages[stage_index][int(parts[1])]
        if parts[2] == "agg_raw":
            node.agg_raw = new
        else:
            node.kernels[parts[2]] = new
