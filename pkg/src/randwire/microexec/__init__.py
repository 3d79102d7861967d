"""Reference numerical interpreter for NetworkIR at toy sizes."""

from .damage import (
    DamageStats,
    damage,
    edge_drop_mask,
    removable_edges,
    removable_nodes,
)
from .forward import forward, validate_store
from .gradcheck import GradCheckReport, complex_step_grad, grad_check, mse_loss
from .values import TensorValue
from .weights import (
    BNState,
    HeadWeights,
    NodeWeights,
    StemWeights,
    WeightStore,
    init_weights,
    store_from_json,
    store_to_json,
)

__all__ = [
    "BNState",
    "DamageStats",
    "GradCheckReport",
    "HeadWeights",
    "NodeWeights",
    "StemWeights",
    "TensorValue",
    "WeightStore",
    "complex_step_grad",
    "damage",
    "edge_drop_mask",
    "forward",
    "grad_check",
    "init_weights",
    "mse_loss",
    "removable_edges",
    "removable_nodes",
    "store_from_json",
    "store_to_json",
    "validate_store",
]
