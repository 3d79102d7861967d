"""Graphviz DOT text export (deterministic node/edge ordering).

Stage input pseudo-nodes are drawn blue and output pseudo-nodes red; internal
nodes are gray ellipses labeled with their DAG index.
"""
from __future__ import annotations

from .dag import StageDag
from .graphs import UndirectedGraph
from .ir import NetworkIR

INPUT_STYLE = 'style=filled, fillcolor="#4a90d9", fontcolor=white'
OUTPUT_STYLE = 'style=filled, fillcolor="#d94a4a", fontcolor=white'
NODE_STYLE = 'style=filled, fillcolor="#e5e5e5"'


def graph_dot(g: UndirectedGraph, name: str = "g") -> str:
    lines = [f"graph {name} {{"]
    lines.append(f"  node [{NODE_STYLE}];")
    for v in range(g.n):
        lines.append(f"  n{v};")
    for u, v in g.edges:
        lines.append(f"  n{u} -- n{v};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dag_dot(d: StageDag, name: str = "stage") -> str:
    lines = [f"digraph {name} {{", "  rankdir=TB;"]
    lines.append(f'  input [label="in", {INPUT_STYLE}];')
    lines.append(f'  output [label="out", {OUTPUT_STYLE}];')
    for v in range(d.n_internal):
        lines.append(f"  n{v} [{NODE_STYLE}];")
    for v in d.original_inputs:
        lines.append(f"  input -> n{v};")
    for src, dst in d.edges:
        lines.append(f"  n{src} -> n{dst};")
    for v in d.original_outputs:
        lines.append(f"  n{v} -> output;")
    lines.append("}")
    return "\n".join(lines) + "\n"


def network_dot(ir: NetworkIR) -> str:
    """Full network: stem chain, one cluster per stage, classifier head."""
    lines = ["digraph network {", "  rankdir=TB;", '  node [shape=ellipse];']
    prev = "input_image"
    lines.append(f'  {prev} [label="image", shape=box];')
    for s in ir.stem:
        nid = f"stem_{s.name}"
        label = f"{s.name} 3x3/{s.stride} {s.in_channels}>{s.out_channels}"
        lines.append(f'  {nid} [label="{label}", shape=box];')
        lines.append(f"  {prev} -> {nid};")
        prev = nid
    for stage in ir.stages:
        pass_through = f"{stage.name}_in"
        lines.append(f"  subgraph cluster_{stage.name} {{")
        lines.append(f'    label="{stage.name} ({stage.channels}ch, {stage.resolution}px)";')
        lines.append(f'    {pass_through} [label="in", {INPUT_STYLE}];')
        lines.append(f'    {stage.name}_out [label="out", {OUTPUT_STYLE}];')
        for node in stage.nodes:
            if node.is_pseudo:
                continue
            mark = "*" if node.stride == 2 else ""
            lines.append(f'    {stage.name}_n{node.id} [label="{node.id}{mark}", {NODE_STYLE}];')
        for node in stage.nodes:
            if node.id == stage.input_node:
                continue
            this = f"{stage.name}_out" if node.id == stage.output_node else f"{stage.name}_n{node.id}"
            for src in node.in_edges:
                that = pass_through if src == stage.input_node else f"{stage.name}_n{src}"
                lines.append(f"    {that} -> {this};")
        lines.append("  }")
        lines.append(f"  {prev} -> {pass_through};")
        prev = f"{stage.name}_out"
    lines.append(f'  head [label="1x1 conv {ir.head.conv_channels} | pool | fc {ir.head.class_count}", shape=box];')
    lines.append(f"  {prev} -> head;")
    lines.append("}")
    return "\n".join(lines) + "\n"
