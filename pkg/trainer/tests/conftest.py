import subprocess
from pathlib import Path

import pytest
import torch

TINY_FLAGS = ["--model", "ws", "--n", "8", "--k", "4", "--p", "0.75", "--seed", "1",
              "--regime", "small", "--c", "16", "--classes", "10", "--resolution", "32"]


def randwire_cli(*argv, check=True):
    """Invoke the graph toolchain CLI (the trainer's only channel to it)."""
    return subprocess.run(["randwire", *argv], capture_output=True, text=True, check=check)


@pytest.fixture(scope="session")
def tiny_ir_path(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("ir") / "tiny"
    randwire_cli("gen", *TINY_FLAGS, "--out", str(out))
    return Path(f"{out}.ir.json")


def randomize_state(model, seed=3):
    """Move BN statistics and aggregation weights off their inert init values.

    A freshly built net at eval time runs BN with zero-mean/unit-var running
    stats, which collapses activations; structural tests need a live signal.
    """
    torch.manual_seed(seed)
    with torch.no_grad():
        for m in model.modules():
            if isinstance(m, torch.nn.BatchNorm2d):
                m.running_mean.normal_(0, 0.05)
                m.running_var.uniform_(0.8, 1.2)
                m.weight.normal_(1.0, 0.1)
                m.bias.normal_(0, 0.1)
            if hasattr(m, "agg_raw"):
                m.agg_raw.normal_(0, 0.5)
    return model
