"""Random undirected graph samplers: ER, BA and WS models.

Every sampler is a pure function of (parameters, seed): the seed feeds a
Mersenne Twister (see :mod:`randwire.rng`) and the stream consumption order is
fixed and documented per model. Outputs are canonical: edge lists sorted with
u < v, no self-loops, no duplicates.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

from .errors import ParameterError
from .rng import MASK64, make_rng


class GraphFamily(str, Enum):
    ER = "er"
    BA = "ba"
    WS = "ws"


@dataclass(frozen=True)
class UndirectedGraph:
    """Immutable undirected graph with 0-based node ids and canonical edges."""

    n: int
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "UndirectedGraph":
        """Canonicalize (sort, orient u<v) and validate an edge collection."""
        canon = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise ParameterError(f"self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ParameterError(f"edge ({u},{v}) out of range for n={n}")
            canon.add((u, v) if u < v else (v, u))
        return cls(n=n, edges=tuple(sorted(canon)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def to_json_dict(self) -> dict:
        return {"n": self.n, "edges": [[u, v] for u, v in self.edges]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "UndirectedGraph":
        return cls.from_edges(int(d["n"]), d["edges"])


@dataclass(frozen=True)
class GeneratorSpec:
    """The (parameters, seed) pair that fully determines a sampled graph.

    Family-specific parameters must be set exactly for the chosen family:
    ``er_p`` for ER, ``ba_m`` for BA, ``ws_k``/``ws_p`` for WS.
    """

    family: GraphFamily
    node_count: int
    seed: int
    er_p: Optional[float] = None
    ba_m: Optional[int] = None
    ws_k: Optional[int] = None
    ws_p: Optional[float] = None

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise ParameterError(f"node_count must be >= 1, got {self.node_count}")
        if not (0 <= self.seed <= MASK64):
            raise ParameterError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        fam = self.family
        if fam == GraphFamily.ER:
            self._require(er_p=True, ba_m=False, ws_k=False, ws_p=False)
            if not (0.0 <= self.er_p <= 1.0):
                raise ParameterError(f"er_p must be in [0,1], got {self.er_p}")
        elif fam == GraphFamily.BA:
            self._require(er_p=False, ba_m=True, ws_k=False, ws_p=False)
            if not (1 <= self.ba_m < self.node_count):
                raise ParameterError(
                    f"ba_m must satisfy 1 <= m < n, got m={self.ba_m}, n={self.node_count}"
                )
        elif fam == GraphFamily.WS:
            self._require(er_p=False, ba_m=False, ws_k=True, ws_p=True)
            if self.ws_k % 2 != 0 or not (2 <= self.ws_k < self.node_count):
                raise ParameterError(
                    f"ws_k must be even with 2 <= k < n, got k={self.ws_k}, n={self.node_count}"
                )
            if not (0.0 <= self.ws_p <= 1.0):
                raise ParameterError(f"ws_p must be in [0,1], got {self.ws_p}")
        else:  # pragma: no cover - enum is closed
            raise ParameterError(f"unknown family {fam}")

    def _require(self, **present: bool) -> None:
        for name, wanted in present.items():
            value = getattr(self, name)
            if wanted and value is None:
                raise ParameterError(f"{self.family.value} spec requires {name}")
            if not wanted and value is not None:
                raise ParameterError(f"{name} is not a {self.family.value} parameter")

    def with_node_count(self, n: int) -> "GeneratorSpec":
        return GeneratorSpec(self.family, n, self.seed, self.er_p, self.ba_m, self.ws_k, self.ws_p)

    def with_seed(self, seed: int) -> "GeneratorSpec":
        return GeneratorSpec(self.family, self.node_count, seed, self.er_p, self.ba_m, self.ws_k, self.ws_p)

    def label(self) -> str:
        if self.family == GraphFamily.ER:
            params = f"{self.er_p:g}"
        elif self.family == GraphFamily.BA:
            params = f"{self.ba_m}"
        else:
            params = f"{self.ws_k},{self.ws_p:g}"
        return f"{self.family.value}({params})-n{self.node_count}-s{self.seed}"

    def to_json_dict(self) -> dict:
        d = {"family": self.family.value, "node_count": self.node_count, "seed": self.seed}
        for name in ("er_p", "ba_m", "ws_k", "ws_p"):
            value = getattr(self, name)
            if value is not None:
                d[name] = value
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "GeneratorSpec":
        return cls(
            family=GraphFamily(d["family"]),
            node_count=int(d["node_count"]),
            seed=int(d["seed"]),
            er_p=d.get("er_p"),
            ba_m=d.get("ba_m"),
            ws_k=d.get("ws_k"),
            ws_p=d.get("ws_p"),
        )


@dataclass(frozen=True)
class SampledGraph:
    """A sampled graph plus the node ordering used for DAG conversion.

    ``dag_order[i]`` is the original node id that receives DAG index ``i``.
    ER draws a fresh random permutation (from the same stream, immediately
    after sampling); BA uses addition order and WS clockwise ring order, both
    of which coincide with the node ids.
    """

    graph: UndirectedGraph
    dag_order: tuple[int, ...]
    spec: GeneratorSpec


def sample_er(n: int, p: float, rng: random.Random) -> UndirectedGraph:
    """ER model: each unordered pair gets one independent Bernoulli(p) draw.

    Stream order: pairs (u,v) visited lexicographically, u from 0 to n-2,
    v from u+1 to n-1, consuming one ``rng.random()`` per pair.
    """
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"edge probability must be in [0,1], got {p}")
    if n < 1:
        raise ParameterError(f"node count must be >= 1, got {n}")
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.append((u, v))
    return UndirectedGraph(n=n, edges=tuple(edges))


def sample_ba(n: int, m: int, rng: random.Random) -> UndirectedGraph:
    """BA model: m seed nodes, then n-m nodes each attaching m distinct edges.

    Attachment is degree-proportional, implemented by uniform choice from a
    list holding each existing node once per unit of degree; duplicates are
    rejection-resampled. While all existing degrees are zero (the first added
    node) targets are chosen uniformly among existing nodes. Stream order:
    nodes added in id order m..n-1; each draw consumes one ``rng.randrange``.
    """
    if not (1 <= m < n):
        raise ParameterError(f"ba m must satisfy 1 <= m < n, got m={m}, n={n}")
    repeated: list[int] = []  # node id repeated once per unit of degree
    edges = []
    for source in range(m, n):
        targets: set[int] = set()
        while len(targets) < m:
            if repeated:
                candidate = repeated[rng.randrange(len(repeated))]
            else:
                candidate = rng.randrange(source)
            if candidate not in targets:
                targets.add(candidate)
        for t in sorted(targets):
            edges.append((t, source))  # t < source always
            repeated.append(t)
            repeated.append(source)
    return UndirectedGraph(n=n, edges=tuple(sorted(edges)))


def sample_ws(n: int, k: int, p: float, rng: random.Random) -> UndirectedGraph:
    """WS model: ring lattice with K/2 neighbors per side, then rewiring.

    For i = 1..k/2, looping clockwise over nodes v, the edge from v to its
    clockwise i-th next node is rewired with probability p to a uniformly
    chosen node that is not v and not already adjacent to v (re-drawn until
    valid). An edge absent at its turn (already rewired away) is skipped, and
    so is rewiring when v is already adjacent to every other node (no valid
    replacement exists). Stream order: one ``rng.random()`` per present (i, v)
    edge, then ``rng.randrange(n)`` draws until the replacement is valid.
    """
    if k % 2 != 0 or not (2 <= k < n):
        raise ParameterError(f"ws k must be even with 2 <= k < n, got k={k}, n={n}")
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"rewiring probability must be in [0,1], got {p}")
    adj: list[set[int]] = [set() for _ in range(n)]
    half = k // 2
    for v in range(n):
        for i in range(1, half + 1):
            w = (v + i) % n
            adj[v].add(w)
            adj[w].add(v)
    for i in range(1, half + 1):
        for v in range(n):
            w = (v + i) % n
            if w not in adj[v]:
                continue  # this lattice edge was rewired away earlier
            if rng.random() < p:
                if len(adj[v]) >= n - 1:
                    continue  # v already adjacent to everyone: nothing to rewire to
                while True:
                    u = rng.randrange(n)
                    if u != v and u not in adj[v]:
                        break
                adj[v].discard(w)
                adj[w].discard(v)
                adj[v].add(u)
                adj[u].add(v)
    edges = set()
    for v in range(n):
        for w in adj[v]:
            edges.add((v, w) if v < w else (w, v))
    return UndirectedGraph(n=n, edges=tuple(sorted(edges)))


def sample(spec: GeneratorSpec) -> SampledGraph:
    """Sample the graph for a spec together with its DAG node ordering."""
    rng = make_rng(spec.seed)
    if spec.family == GraphFamily.ER:
        graph = sample_er(spec.node_count, spec.er_p, rng)
        order = list(range(spec.node_count))
        rng.shuffle(order)  # same stream, immediately after sampling
    elif spec.family == GraphFamily.BA:
        graph = sample_ba(spec.node_count, spec.ba_m, rng)
        order = list(range(spec.node_count))
    else:
        graph = sample_ws(spec.node_count, spec.ws_k, spec.ws_p, rng)
        order = list(range(spec.node_count))
    return SampledGraph(graph=graph, dag_order=tuple(order), spec=spec)


def is_connected(g: UndirectedGraph) -> bool:
    """True iff g has a single connected component (vacuously for n <= 1)."""
    if g.n <= 1:
        return True
    adj = g.adjacency()
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == g.n


def ring_lattice(n: int, k: int) -> UndirectedGraph:
    """The analytic WS(k, p=0) ring lattice, built without randomness."""
    if k % 2 != 0 or not (2 <= k < n):
        raise ParameterError(f"ws k must be even with 2 <= k < n, got k={k}, n={n}")
    edges = set()
    for v in range(n):
        for i in range(1, k // 2 + 1):
            w = (v + i) % n
            edges.add((v, w) if v < w else (w, v))
    return UndirectedGraph(n=n, edges=tuple(sorted(edges)))
