"""Lower generator specs into a full multi-stage NetworkIR.

Stage plan (input resolution halves at every stage):

    small:   conv1 3x3/2 C/2 (Conv-BN), conv2 3x3/2 C, then three random
             stages of N nodes at C, 2C, 4C channels.
    regular: conv1 3x3/2 C/2 (Conv-BN), then four random stages of
             N/2, N, N, N nodes at C, 2C, 4C, 8C channels.

Every node directly connected to a stage's input pseudo-node gets stride 2
and carries the channel change from the previous stage's width to the stage
width; all other internal nodes keep stride 1 and equal in/out channels. The
head is a 1x1 conv to 1280 channels, global average pooling and a fully
connected classifier. Stage i (0-based over the random stages) is sampled
with the sub-seed ``stage_seed(spec.seed, i)``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .dag import StageDag, dag_from_sample
from .errors import ParameterError
from .graphs import GeneratorSpec, sample
from .ir import (
    NODE_OP_KINDS,
    HeadIR,
    IRNode,
    NetworkIR,
    OpKind,
    Regime,
    StageIR,
    StemConv,
)
from .rng import stage_seed

HEAD_CHANNELS = 1280


def conv_out_resolution(resolution: int, stride: int) -> int:
    """Output size of a 3x3 convolution with padding 1 at the given stride."""
    return (resolution - 1) // stride + 1


def stem_width(channels: int) -> int:
    """conv1 width C/2, rounded half up when C is odd."""
    return (channels + 1) // 2


@dataclass(frozen=True)
class StagePlan:
    name: str
    node_count: int
    in_channels: int
    channels: int


def plan_stages(regime: Regime, node_count: int, channels: int) -> tuple[tuple[StemConv, ...], tuple[StagePlan, ...]]:
    c_stem = stem_width(channels)
    if regime == Regime.SMALL:
        stem = (
            StemConv("conv1", 3, c_stem, 2, relu_first=False),
            StemConv("conv2", c_stem, channels, 2, relu_first=True),
        )
        plans = (
            StagePlan("conv3", node_count, channels, channels),
            StagePlan("conv4", node_count, channels, 2 * channels),
            StagePlan("conv5", node_count, 2 * channels, 4 * channels),
        )
    else:
        if node_count % 2 != 0:
            raise ParameterError(f"regular regime needs an even node count, got {node_count}")
        stem = (StemConv("conv1", 3, c_stem, 2, relu_first=False),)
        plans = (
            StagePlan("conv2", node_count // 2, c_stem, channels),
            StagePlan("conv3", node_count, channels, 2 * channels),
            StagePlan("conv4", node_count, 2 * channels, 4 * channels),
            StagePlan("conv5", node_count, 4 * channels, 8 * channels),
        )
    return stem, plans


def lower_stage(
    dag: StageDag,
    name: str,
    seed: int,
    in_channels: int,
    channels: int,
    resolution: int,
    op_kind: OpKind,
    graph=None,
) -> StageIR:
    """Type the nodes of one stage DAG.

    Original-input nodes read the previous width at stride 2; everything else
    keeps the stage width at stride 1. Node in_edges list internal
    predecessors in ascending order, with the input pseudo-node appended for
    original inputs.
    """
    preds: dict[int, list[int]] = {v: [] for v in range(dag.n_internal)}
    for src, dst in dag.edges:
        preds[dst].append(src)
    original_inputs = set(dag.original_inputs)

    nodes = []
    for v in range(dag.n_internal):
        is_entry = v in original_inputs
        in_edges = sorted(preds[v])
        if is_entry:
            in_edges.append(dag.input_node)
        nodes.append(
            IRNode(
                id=v,
                kind=op_kind,
                in_channels=in_channels if is_entry else channels,
                out_channels=channels,
                stride=2 if is_entry else 1,
                in_edges=tuple(in_edges),
            )
        )
    nodes.append(
        IRNode(
            id=dag.input_node,
            kind=OpKind.AGGREGATE_ONLY,
            in_channels=in_channels,
            out_channels=in_channels,
            stride=1,
            in_edges=(),
        )
    )
    nodes.append(
        IRNode(
            id=dag.output_node,
            kind=OpKind.AGGREGATE_ONLY,
            in_channels=channels,
            out_channels=channels,
            stride=1,
            in_edges=tuple(sorted(dag.original_outputs)),
        )
    )
    return StageIR(
        name=name,
        seed=seed,
        in_channels=in_channels,
        channels=channels,
        resolution=resolution,
        n_internal=dag.n_internal,
        nodes=tuple(nodes),
        dag=dag,
        graph=graph,
    )


def assemble(
    spec: GeneratorSpec,
    regime: Regime,
    channels: int,
    op_kind: OpKind = OpKind.SEPARABLE_CONV_3X3,
    class_count: int = 1000,
    input_resolution: int = 224,
) -> NetworkIR:
    """Build the full NetworkIR for a generator spec."""
    if channels < 1:
        raise ParameterError(f"channels must be positive, got {channels}")
    if op_kind not in NODE_OP_KINDS:
        raise ParameterError(f"{op_kind.value} is not a stage-node operation")
    if input_resolution < 1:
        raise ParameterError(f"input resolution must be positive, got {input_resolution}")

    stem, plans = plan_stages(regime, spec.node_count, channels)

    resolution = input_resolution
    for s in stem:
        resolution = conv_out_resolution(resolution, s.stride)

    stages = []
    for i, plan in enumerate(plans):
        sub_seed = stage_seed(spec.seed, i)
        stage_spec = spec.with_node_count(plan.node_count).with_seed(sub_seed)
        sampled = sample(stage_spec)
        dag = dag_from_sample(sampled)
        resolution = conv_out_resolution(resolution, 2)
        stages.append(
            lower_stage(
                dag,
                name=plan.name,
                seed=sub_seed,
                in_channels=plan.in_channels,
                channels=plan.channels,
                resolution=resolution,
                op_kind=op_kind,
                graph=sampled.graph,
            )
        )

    head = HeadIR(in_channels=plans[-1].channels, conv_channels=HEAD_CHANNELS, class_count=class_count)
    return NetworkIR(
        regime=regime,
        base_channels=channels,
        op_kind=op_kind,
        input_resolution=input_resolution,
        class_count=class_count,
        provenance=spec,
        stem=stem,
        stages=tuple(stages),
        head=head,
    )


def assemble_from_dags(
    dags: list[StageDag],
    regime: Regime,
    channels: int,
    provenance: GeneratorSpec,
    op_kind: OpKind = OpKind.SEPARABLE_CONV_3X3,
    class_count: int = 1000,
    input_resolution: int = 224,
) -> NetworkIR:
    """Assemble from pre-built stage DAGs (one per random stage).

    Used by tests and tools that need hand-crafted wirings; the stage plan
    ignores the plan's node counts in favor of each DAG's size.
    """
    stem, plans = plan_stages(regime, provenance.node_count, channels)
    if len(dags) != len(plans):
        raise ParameterError(f"expected {len(plans)} stage dags, got {len(dags)}")
    resolution = input_resolution
    for s in stem:
        resolution = conv_out_resolution(resolution, s.stride)
    stages = []
    for i, (dag, plan) in enumerate(zip(dags, plans)):
        resolution = conv_out_resolution(resolution, 2)
        stages.append(
            lower_stage(
                dag,
                name=plan.name,
                seed=stage_seed(provenance.seed, i),
                in_channels=plan.in_channels,
                channels=plan.channels,
                resolution=resolution,
                op_kind=op_kind,
            )
        )
    head = HeadIR(in_channels=plans[-1].channels, conv_channels=HEAD_CHANNELS, class_count=class_count)
    return NetworkIR(
        regime=regime,
        base_channels=channels,
        op_kind=op_kind,
        input_resolution=input_resolution,
        class_count=class_count,
        provenance=provenance,
        stem=stem,
        stages=tuple(stages),
        head=head,
    )
