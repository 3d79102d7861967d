"""Randomly wired network toolchain.

Samples random graphs (ER/BA/WS), lowers them to multi-stage DAG networks,
counts their FLOPs/parameter budgets statically, executes them numerically at
toy sizes and performs graph-damage edits.
"""

from .assemble import assemble, assemble_from_dags
from .complexity import ComplexityReport, analyze, decoupling_check, fit_channels
from .dag import DagDiagnostics, StageDag, dag_from_sample, to_dag, validate_dag
from .errors import (
    ContractError,
    NonFiniteError,
    ParameterError,
    SchemaError,
    StructuralError,
)
from .graphs import (
    GeneratorSpec,
    GraphFamily,
    SampledGraph,
    UndirectedGraph,
    is_connected,
    ring_lattice,
    sample,
    sample_ba,
    sample_er,
    sample_ws,
)
from .ir import (
    IRNode,
    NetworkIR,
    OpKind,
    Regime,
    StageIR,
    ir_from_json,
    ir_to_json,
    node_semantics,
)

__version__ = "0.1.0"

__all__ = [
    "ComplexityReport",
    "ContractError",
    "DagDiagnostics",
    "GeneratorSpec",
    "GraphFamily",
    "IRNode",
    "NetworkIR",
    "NonFiniteError",
    "OpKind",
    "ParameterError",
    "Regime",
    "SampledGraph",
    "SchemaError",
    "StageDag",
    "StageIR",
    "StructuralError",
    "UndirectedGraph",
    "analyze",
    "assemble",
    "assemble_from_dags",
    "dag_from_sample",
    "decoupling_check",
    "fit_channels",
    "ir_from_json",
    "ir_to_json",
    "is_connected",
    "node_semantics",
    "ring_lattice",
    "sample",
    "sample_ba",
    "sample_er",
    "sample_ws",
    "to_dag",
    "validate_dag",
]
