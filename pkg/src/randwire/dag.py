"""Convert undirected graphs into stage DAGs.

Every node gets a DAG index and each undirected edge is oriented from the
smaller index to the larger one, which makes the result acyclic by
construction. The index assignment depends on the model: ER uses a random
permutation, BA the order in which nodes were added, WS the clockwise ring
order. Two pseudo-nodes are then appended: a unique input node feeding every
internal node that has no incoming internal edge, and a unique output node fed
by every internal node with no outgoing internal edge.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ContractError, ParameterError
from .graphs import GraphFamily, SampledGraph, UndirectedGraph


@dataclass(frozen=True)
class StageDag:
    """Directed acyclic stage graph over internal indices 0..n_internal-1.

    ``input_node`` and ``output_node`` are the two pseudo-nodes (indices
    n_internal and n_internal+1). ``index_map[original_id]`` gives the DAG
    index assigned to a sampled-graph node.
    """

    n_internal: int
    edges: tuple[tuple[int, int], ...]
    original_inputs: tuple[int, ...]
    original_outputs: tuple[int, ...]
    index_map: tuple[int, ...]

    @property
    def input_node(self) -> int:
        return self.n_internal

    @property
    def output_node(self) -> int:
        return self.n_internal + 1

    def in_degrees(self) -> list[int]:
        deg = [0] * self.n_internal
        for _, dst in self.edges:
            deg[dst] += 1
        return deg

    def out_degrees(self) -> list[int]:
        deg = [0] * self.n_internal
        for src, _ in self.edges:
            deg[src] += 1
        return deg


@dataclass(frozen=True)
class DagDiagnostics:
    cycle_free: bool
    unreachable: tuple[int, ...]
    isolated: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return self.cycle_free and not self.unreachable


def to_dag(
    g: UndirectedGraph,
    family: GraphFamily,
    order: Optional[Sequence[int]] = None,
    rng: Optional[random.Random] = None,
) -> StageDag:
    """Orient ``g`` into a StageDag using the family's indexing strategy.

    ``order[i]`` is the original node id assigned DAG index ``i``. BA and WS
    must pass the ordering recorded at sampling time; for ER a fresh random
    permutation is drawn from ``rng`` when no order is given.
    """
    if g.n < 1:
        raise ParameterError("cannot build a DAG from an empty graph")
    if order is None:
        if family in (GraphFamily.BA, GraphFamily.WS):
            raise ContractError(f"{family.value} requires the sampling-time node order")
        if rng is None:
            raise ContractError("er indexing needs an rng when no order is given")
        order = list(range(g.n))
        rng.shuffle(order)
    if sorted(order) != list(range(g.n)):
        raise ContractError("order must be a permutation of the graph's node ids")

    index_map = [0] * g.n
    for idx, original in enumerate(order):
        index_map[original] = idx

    edges = sorted(
        (index_map[u], index_map[v]) if index_map[u] < index_map[v] else (index_map[v], index_map[u])
        for u, v in g.edges
    )
    in_deg = [0] * g.n
    out_deg = [0] * g.n
    for src, dst in edges:
        out_deg[src] += 1
        in_deg[dst] += 1
    return StageDag(
        n_internal=g.n,
        edges=tuple(edges),
        original_inputs=tuple(v for v in range(g.n) if in_deg[v] == 0),
        original_outputs=tuple(v for v in range(g.n) if out_deg[v] == 0),
        index_map=tuple(index_map),
    )


def dag_from_sample(sampled: SampledGraph) -> StageDag:
    """StageDag for a sampled graph, using its recorded ordering."""
    return to_dag(sampled.graph, sampled.spec.family, order=sampled.dag_order)


def validate_dag(d: StageDag) -> DagDiagnostics:
    """Diagnostics for a stage DAG; never mutates or raises.

    Reports whether the full graph (pseudo-nodes included) is cycle-free,
    which internal nodes cannot be reached from the input pseudo-node, and
    which are isolated (no internal edges at all; such nodes are wired to
    both pseudo-nodes).
    """
    n = d.n_internal
    succ: list[list[int]] = [[] for _ in range(n + 2)]
    for src, dst in d.edges:
        succ[src].append(dst)
    for v in d.original_inputs:
        succ[d.input_node].append(v)
    for v in d.original_outputs:
        succ[v].append(d.output_node)

    # iterative three-color DFS over the full node set
    WHITE, GRAY, BLACK = 0, 1, 2
    color = [WHITE] * (n + 2)
    cycle_free = True
    for start in range(n + 2):
        if color[start] != WHITE:
            continue
        stack: list[tuple[int, int]] = [(start, 0)]
        color[start] = GRAY
        while stack:
            node, i = stack[-1]
            if i < len(succ[node]):
                stack[-1] = (node, i + 1)
                nxt = succ[node][i]
                if color[nxt] == GRAY:
                    cycle_free = False
                elif color[nxt] == WHITE:
                    color[nxt] = GRAY
                    stack.append((nxt, 0))
            else:
                color[node] = BLACK
                stack.pop()

    seen = {d.input_node}
    stack2 = [d.input_node]
    while stack2:
        x = stack2.pop()
        for y in succ[x]:
            if y not in seen:
                seen.add(y)
                stack2.append(y)
    unreachable = tuple(v for v in range(n) if v not in seen)

    in_deg = d.in_degrees()
    out_deg = d.out_degrees()
    isolated = tuple(v for v in range(n) if in_deg[v] == 0 and out_deg[v] == 0)
    return DagDiagnostics(cycle_free=cycle_free, unreachable=unreachable, isolated=isolated)
