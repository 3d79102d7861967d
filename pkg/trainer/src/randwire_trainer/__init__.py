"""PyTorch training harness for randomly wired network IR files."""

from .ablate import ablate, edge_trend_report, run_ablation
from .data import load_cifar10, normalize, synth10
from .export import export_weights
from .ir_model import RandWireNet, StructuralError, build_model, load_ir, parameter_count
from .train import TrainConfig, compare_generators, evaluate, train

__all__ = [
    "RandWireNet",
    "StructuralError",
    "TrainConfig",
    "ablate",
    "build_model",
    "compare_generators",
    "edge_trend_report",
    "evaluate",
    "export_weights",
    "load_cifar10",
    "load_ir",
    "normalize",
    "parameter_count",
    "run_ablation",
    "synth10",
    "train",
]
