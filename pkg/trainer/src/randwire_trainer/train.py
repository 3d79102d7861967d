"""Desk-scale training loop.

SGD with momentum, half-period cosine learning-rate decay, label smoothing,
and the edge-drop regularizer: per mini-batch, with probability p one
uniformly chosen internal edge whose target aggregates more than one input is
dropped (no re-normalization), matching the reference interpreter's mask
semantics. All hyperparameters land in run.json next to the metrics.
"""
from __future__ import annotations

import json
import math
import platform
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import torch
from torch import nn

from . import data as data_mod
from .export import export_weights
from .ir_model import RandWireNet, internal_edges, load_ir, parameter_count


@dataclass
class TrainConfig:
    dataset: str = "cifar10"  # "cifar10" | "synth10"
    epochs: int = 10
    batch_size: int = 128
    lr: float = 0.1
    momentum: float = 0.9
    weight_decay: float = 5e-5
    label_smoothing: float = 0.1
    edge_drop_p: float = 0.1
    warmup_epochs: float = 1.0  # linear ramp before the cosine decay
    lr_schedule: str = "half_cosine"  # declarative; the loop implements exactly this
    eval_protocol: str = "full_val_each_epoch"
    seed: int = 1
    class_count: int = 10
    limit_train: Optional[int] = None  # cap on training examples (documented subset)
    limit_val: Optional[int] = None
    num_threads: int = 0  # 0 = leave torch default
    out_dir: str = "runs/default"
    extra: dict = field(default_factory=dict)


def _seed_everything(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed % 2**32)
    torch.manual_seed(seed)


def _subsample(x, y, limit: Optional[int]):
    # packed arrays are sorted by class: subsets must be drawn shuffled
    if not limit or limit >= len(x):
        return x, y
    idx = np.sort(np.random.default_rng(9).permutation(len(x))[:limit])
    return x[idx], y[idx]


def load_dataset(config: TrainConfig):
    if config.dataset == "cifar10":
        train_x, train_y, test_x, test_y = data_mod.load_cifar10()
    elif config.dataset == "synth10":
        train_x, train_y, test_x, test_y = data_mod.synth10(seed=config.extra.get("synth_seed", 0))
    else:
        raise ValueError(f"unknown dataset {config.dataset!r}")
    train_x, train_y = _subsample(train_x, train_y, config.limit_train)
    test_x, test_y = _subsample(test_x, test_y, config.limit_val)
    return (
        torch.from_numpy(data_mod.normalize(train_x)),
        torch.from_numpy(train_y),
        torch.from_numpy(data_mod.normalize(test_x)),
        torch.from_numpy(test_y),
    )


def fit_resolution(x: torch.Tensor, resolution: int) -> torch.Tensor:
    """Bilinearly resize a batch to the model's input resolution if needed."""
    if x.shape[-1] == resolution and x.shape[-2] == resolution:
        return x
    return torch.nn.functional.interpolate(
        x, size=(resolution, resolution), mode="bilinear", align_corners=False
    )


@torch.no_grad()
def evaluate(model: nn.Module, x: torch.Tensor, y: torch.Tensor, batch_size: int = 512):
    model.eval()
    resolution = getattr(model, "input_resolution", x.shape[-1])
    loss_fn = nn.CrossEntropyLoss(reduction="sum")
    total_loss = 0.0
    correct = 0
    for start in range(0, len(x), batch_size):
        xb, yb = x[start : start + batch_size], y[start : start + batch_size]
        logits = model(fit_resolution(xb, resolution))
        total_loss += float(loss_fn(logits, yb))
        correct += int((logits.argmax(dim=1) == yb).sum())
    return total_loss / len(x), correct / len(x)


def sample_edge_drop(eligible, p: float, rng: random.Random):
    """Mirror of the reference edge-drop mask: () or one eligible edge."""
    if p <= 0.0 or rng.random() >= p or not eligible:
        return ()
    return (eligible[rng.randrange(len(eligible))],)


def train(ir_path, config: TrainConfig):
    """Train a model for the IR; returns (model, history). Writes artifacts."""
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if config.num_threads:
        torch.set_num_threads(config.num_threads)
    _seed_everything(config.seed)

    ir = load_ir(ir_path)
    model = RandWireNet(ir, class_count=config.class_count)
    train_x, train_y, val_x, val_y = load_dataset(config)

    eligible = [e for e in internal_edges(ir) if _in_degree(ir, e[0], e[2]) > 1]
    drop_rng = random.Random(config.seed * 7919 + 13)

    optimizer = torch.optim.SGD(
        model.parameters(), lr=config.lr, momentum=config.momentum,
        weight_decay=config.weight_decay,
    )
    loss_fn = nn.CrossEntropyLoss(label_smoothing=config.label_smoothing)

    n = len(train_x)
    steps_per_epoch = math.ceil(n / config.batch_size)
    total_steps = steps_per_epoch * config.epochs
    warmup_steps = int(steps_per_epoch * config.warmup_epochs)
    order_rng = torch.Generator().manual_seed(config.seed)

    history = []
    step = 0
    for epoch in range(config.epochs):
        model.train()
        perm = torch.randperm(n, generator=order_rng)
        epoch_loss = 0.0
        epoch_correct = 0
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            xb = fit_resolution(train_x[idx], model.input_resolution)
            yb = train_y[idx]
            if step < warmup_steps:
                lr_t = config.lr * (step + 1) / warmup_steps
            else:
                progress = (step - warmup_steps) / max(total_steps - warmup_steps, 1)
                lr_t = 0.5 * config.lr * (1.0 + math.cos(math.pi * progress))
            for group in optimizer.param_groups:
                group["lr"] = lr_t
            dropped = sample_edge_drop(eligible, config.edge_drop_p, drop_rng)
            logits = model(xb, dropped_edges=dropped)
            loss = loss_fn(logits, yb)
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"training diverged (non-finite loss) at epoch {epoch} step {step}; "
                    f"seed={config.seed} config={asdict(config)}"
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(idx)
            epoch_correct += int((logits.argmax(dim=1) == yb).sum())
            step += 1
        val_loss, val_acc = evaluate(model, val_x, val_y)
        row = {
            "epoch": epoch + 1,
            "train_loss": epoch_loss / n,
            "train_acc": epoch_correct / n,
            "val_loss": val_loss,
            "val_acc": val_acc,
        }
        history.append(row)
        print(
            f"epoch {row['epoch']}/{config.epochs} "
            f"train_loss {row['train_loss']:.4f} train_acc {row['train_acc']:.3f} "
            f"val_loss {row['val_loss']:.4f} val_acc {row['val_acc']:.3f}",
            flush=True,
        )

    _write_metrics(out_dir, history)
    _write_run_record(out_dir, ir_path, config, model, history)
    export_weights(model, out_dir / "weights.json")
    torch.save(model.state_dict(), out_dir / "model.pt")
    return model, history


def _in_degree(ir: dict, stage_index: int, node_id: int) -> int:
    stage = ir["stages"][stage_index]
    node = next(n for n in stage["nodes"] if n["id"] == node_id)
    return len(node["in_edges"])


def compare_generators(ir_paths: dict[str, list], config: TrainConfig, out_dir) -> dict:
    """Train several IRs per generator label and report mean/std of final val acc.

    ``ir_paths`` maps a generator label to the IR files of its sampled
    instances (one per seed). No ordering between generators is asserted;
    the summary is written to generator_comparison.json for inspection.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {}
    for label, paths in ir_paths.items():
        finals = []
        for i, ir_path in enumerate(paths):
            run_config = TrainConfig(**{**asdict(config), "out_dir": str(out_dir / f"{label}-{i}"),
                                        "seed": config.seed + i})
            _, history = train(ir_path, run_config)
            finals.append(history[-1]["val_acc"])
        mean = sum(finals) / len(finals)
        std = (sum((v - mean) ** 2 for v in finals) / (len(finals) - 1)) ** 0.5 if len(finals) > 1 else 0.0
        summary[label] = {"val_acc_mean": mean, "val_acc_std": std, "runs": finals}
    (out_dir / "generator_comparison.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def _write_metrics(out_dir: Path, history: list[dict]) -> None:
    columns = ["epoch", "train_loss", "train_acc", "val_loss", "val_acc"]
    lines = [",".join(columns)]
    for row in history:
        lines.append(",".join(f"{row[c]:.6f}" if c != "epoch" else str(row[c]) for c in columns))
    (out_dir / "metrics.csv").write_text("\n".join(lines) + "\n")
    (out_dir / "metrics.json").write_text(json.dumps(history, indent=2) + "\n")


def _write_run_record(out_dir: Path, ir_path, config: TrainConfig, model, history) -> None:
    record = {
        "ir_path": str(ir_path),
        "config": asdict(config),
        "parameter_count": parameter_count(model),
        "final": history[-1] if history else None,
        "environment": {
            "torch": torch.__version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "platform": platform.platform(),
        },
    }
    (out_dir / "run.json").write_text(json.dumps(record, indent=2) + "\n")
