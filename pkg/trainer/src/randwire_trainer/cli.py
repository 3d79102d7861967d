"""Trainer command line: train, ablate, export-weights, fetch-data."""
from __future__ import annotations

import argparse
import json
import sys

import torch

from . import data as data_mod
from .ablate import run_ablation
from .export import export_weights
from .ir_model import build_model, load_ir
from .train import TrainConfig, load_dataset, train


def cmd_train(args) -> int:
    config = TrainConfig(
        dataset=args.dataset,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        weight_decay=args.weight_decay,
        label_smoothing=args.label_smoothing,
        edge_drop_p=args.edge_drop_p,
        warmup_epochs=args.warmup_epochs,
        seed=args.seed,
        class_count=args.classes,
        limit_train=args.limit_train,
        limit_val=args.limit_val,
        num_threads=args.threads,
        out_dir=args.out_dir,
    )
    train(args.ir, config)
    print(f"artifacts in {args.out_dir}")
    return 0


def cmd_ablate(args) -> int:
    ir = load_ir(args.ir)
    model = build_model(args.ir, class_count=args.classes)
    model.load_state_dict(torch.load(args.model, weights_only=True))
    config = TrainConfig(dataset=args.dataset, class_count=args.classes,
                         limit_val=args.limit_val)
    _, _, val_x, val_y = load_dataset(config)
    report = run_ablation(model, ir, val_x, val_y, args.out_dir)
    print(json.dumps(report["edge_trend"], indent=2))
    print(f"ablation tables in {args.out_dir}")
    return 0


def cmd_export(args) -> int:
    model = build_model(args.ir, class_count=args.classes)
    model.load_state_dict(torch.load(args.model, weights_only=True))
    export_weights(model, args.out)
    print(args.out)
    return 0


def cmd_fetch_data(args) -> int:
    root = data_mod.ensure_cifar10()
    print(root)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="randwire-train")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from an IR file")
    p.add_argument("--ir", required=True)
    p.add_argument("--dataset", choices=["cifar10", "synth10"], default="cifar10")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--weight-decay", type=float, default=5e-5)
    p.add_argument("--label-smoothing", type=float, default=0.1)
    p.add_argument("--edge-drop-p", type=float, default=0.1)
    p.add_argument("--warmup-epochs", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--limit-train", type=int, default=None)
    p.add_argument("--limit-val", type=int, default=None)
    p.add_argument("--threads", type=int, default=0)
    p.add_argument("--out-dir", default="runs/default")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("ablate", help="accuracy-delta tables for node/edge removal")
    p.add_argument("--ir", required=True)
    p.add_argument("--model", required=True, help="model.pt from a training run")
    p.add_argument("--dataset", choices=["cifar10", "synth10"], default="cifar10")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--limit-val", type=int, default=None)
    p.add_argument("--out-dir", default="runs/ablation")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("export-weights", help="write reference-interpreter weights")
    p.add_argument("--ir", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("fetch-data", help="download and pack CIFAR-10")
    p.set_defaults(func=cmd_fetch_data)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
