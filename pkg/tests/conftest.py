import numpy as np
import pytest

from randwire import GeneratorSpec, GraphFamily, Regime, assemble
from randwire.microexec import init_weights


def ws_spec(n=32, k=4, p=0.75, seed=1):
    return GeneratorSpec(GraphFamily.WS, n, seed, ws_k=k, ws_p=p)


def er_spec(n=32, p=0.2, seed=1):
    return GeneratorSpec(GraphFamily.ER, n, seed, er_p=p)


def ba_spec(n=32, m=5, seed=1):
    return GeneratorSpec(GraphFamily.BA, n, seed, ba_m=m)


@pytest.fixture(scope="session")
def tiny_ir():
    """Small-regime net at 32px with four-node stages; cheap to execute."""
    return assemble(ws_spec(n=4, k=2, p=0.0), Regime.SMALL, 8, class_count=10, input_resolution=32)


@pytest.fixture(scope="session")
def tiny_weights(tiny_ir):
    return init_weights(tiny_ir, seed=7)


@pytest.fixture()
def probe_input():
    return np.random.default_rng(0).normal(size=(3, 32, 32))
