"""Metric graphs: combinatorial structure, edge lengths and directed-bond bookkeeping.

Bond convention: edge ``e = (u, v)`` owns bonds ``2e`` (u -> v) and ``2e + 1``
(v -> u), so the reversal involution is ``b ^ 1``.  The local index of an edge
at a vertex is its position in ``vertex_order[vertex]``; incoming and outgoing
bonds of that edge share it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .errors import (
    GraphFileError,
    LoopEdgeError,
    MalformedLineError,
    NonPositiveLengthError,
    ParallelEdgeError,
)


@dataclass(frozen=True)
class MetricGraph:
    vertex_count: int
    edges: tuple
    lengths: Optional[tuple] = None
    vertex_order: tuple = None
    name: str = "graph"
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.vertex_count < 1:
            raise ValueError("vertex_count must be positive")
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        seen = set()
        for u, v in edges:
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u}, {v}) references a missing vertex")
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"parallel edge {key}")
            seen.add(key)
        if self.lengths is not None:
            lengths = tuple(float(x) for x in self.lengths)
            if len(lengths) != len(edges):
                raise ValueError("one length per edge required")
            if not all(x > 0 and math.isfinite(x) for x in lengths):
                raise ValueError("edge lengths must be positive and finite")
            object.__setattr__(self, "lengths", lengths)
        incident = [[] for _ in range(self.vertex_count)]
        for e, (u, v) in enumerate(edges):
            incident[u].append(e)
            incident[v].append(e)
        if self.vertex_order is None:
            order = tuple(tuple(x) for x in incident)
        else:
            order = tuple(tuple(int(e) for e in x) for x in self.vertex_order)
            if len(order) != self.vertex_count:
                raise ValueError("vertex_order needs one entry per vertex")
            for v, (given, expected) in enumerate(zip(order, incident)):
                if sorted(given) != sorted(expected):
                    raise ValueError(f"vertex_order[{v}] must list each incident edge once")
        object.__setattr__(self, "vertex_order", order)

    # -- sizes ---------------------------------------------------------------
    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def bond_count(self) -> int:
        return 2 * len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(x) for x in self.vertex_order], dtype=np.int64)

    @property
    def has_lengths(self) -> bool:
        return self.lengths is not None

    @property
    def total_length(self) -> float:
        self._require_lengths()
        return math.fsum(self.lengths)

    def _require_lengths(self):
        if self.lengths is None:
            raise ValueError(f"graph {self.name!r} has no edge lengths; use sample_lengths")

    # -- bonds ---------------------------------------------------------------
    @property
    def bond_origin(self) -> np.ndarray:
        out = np.empty(self.bond_count, dtype=np.int64)
        for e, (u, v) in enumerate(self.edges):
            out[2 * e], out[2 * e + 1] = u, v
        return out

    @property
    def bond_terminal(self) -> np.ndarray:
        out = np.empty(self.bond_count, dtype=np.int64)
        for e, (u, v) in enumerate(self.edges):
            out[2 * e], out[2 * e + 1] = v, u
        return out

    @property
    def bond_edge(self) -> np.ndarray:
        return np.repeat(np.arange(self.edge_count), 2)

    @property
    def bond_lengths(self) -> np.ndarray:
        self._require_lengths()
        return np.repeat(np.asarray(self.lengths, dtype=float), 2)

    @property
    def bonds(self) -> list:
        """``(edge, origin, terminal)`` for every bond, in bond order."""
        return [(b >> 1, int(o), int(t))
                for b, (o, t) in enumerate(zip(self.bond_origin, self.bond_terminal))]

    @staticmethod
    def reversal(b: int) -> int:
        return b ^ 1

    def local_index(self, vertex: int, edge: int) -> int:
        return self.vertex_order[vertex].index(edge)

    def bonds_at(self, vertex: int):
        """Incoming and outgoing bond ids at ``vertex``, ordered by local index."""
        key = ("bonds_at", vertex)
        if key not in self._cache:
            incoming, outgoing = [], []
            for e in self.vertex_order[vertex]:
                u, _ = self.edges[e]
                if u == vertex:
                    outgoing.append(2 * e)
                    incoming.append(2 * e + 1)
                else:
                    outgoing.append(2 * e + 1)
                    incoming.append(2 * e)
            self._cache[key] = (np.array(incoming), np.array(outgoing))
        return self._cache[key]

    # -- derived graphs --------------------------------------------------------
    def with_lengths(self, lengths) -> "MetricGraph":
        return MetricGraph(self.vertex_count, self.edges, tuple(lengths),
                           self.vertex_order, self.name)

    def renamed(self, name: str) -> "MetricGraph":
        return MetricGraph(self.vertex_count, self.edges, self.lengths,
                           self.vertex_order, name)

    # -- predicates ------------------------------------------------------------
    def is_eulerian(self) -> bool:
        return bool(np.all(self.degrees % 2 == 0)) and self.is_connected()

    def is_connected(self) -> bool:
        adj = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {0}
        stack = [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.vertex_count

    def is_bipartite(self) -> bool:
        colour = [-1] * self.vertex_count
        adj = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for start in range(self.vertex_count):
            if colour[start] >= 0:
                continue
            colour[start] = 0
            stack = [start]
            while stack:
                x = stack.pop()
                for w in adj[x]:
                    if colour[w] < 0:
                        colour[w] = 1 - colour[x]
                        stack.append(w)
                    elif colour[w] == colour[x]:
                        return False
        return True


@dataclass(frozen=True)
class LengthSampler:
    """i.i.d. uniform edge lengths on ``[low, high)`` from a seeded generator."""

    seed: int = 0
    low: float = 1.0
    high: float = 2.0

    def draw(self, count: int) -> np.ndarray:
        if not self.low < self.high:
            raise ValueError("need low < high")
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.low, self.high, size=count)


def sample_lengths(graph: MetricGraph, sampler: LengthSampler) -> MetricGraph:
    return graph.with_lengths(sampler.draw(graph.edge_count))


def from_edges(vertex_count, edges, lengths=None, vertex_order=None, name="graph"):
    return MetricGraph(vertex_count, tuple(edges), None if lengths is None else tuple(lengths),
                       vertex_order, name)


# -- builders -------------------------------------------------------------------

def build_complete(V: int) -> MetricGraph:
    """Complete graph K_V; edges in lexicographic order of (i < j)."""
    if V < 3:
        raise ValueError("complete graph needs V >= 3")
    return from_edges(V, combinations(range(V), 2), name=f"K{V}")


def build_octahedron() -> MetricGraph:
    """Octahedron K_{2,2,2}.

    Vertices ``2i`` and ``2i + 1`` are antipodal; every other pair is an edge,
    listed lexicographically.
    """
    edges = [(i, j) for i, j in combinations(range(6), 2) if i // 2 != j // 2]
    return from_edges(6, edges, name="octahedron")


def build_cube() -> MetricGraph:
    """Cube graph Q_3 on bit-vectors 0..7; edges join words at Hamming distance one."""
    edges = [(i, j) for i, j in combinations(range(8), 2) if bin(i ^ j).count("1") == 1]
    return from_edges(8, edges, name="cube")


def build_cycle(n: int) -> MetricGraph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)], name=f"C{n}")


def build_interval(length: float) -> MetricGraph:
    if not length > 0:
        raise ValueError("length must be positive")
    return from_edges(2, [(0, 1)], [length], name="interval")


def build_bowtie() -> MetricGraph:
    """Two triangles glued at vertex 0 (one degree-4 vertex, four of degree 2)."""
    return from_edges(5, [(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)], name="bowtie")


BUILDERS = {
    "octahedron": build_octahedron,
    "cube": build_cube,
    "bowtie": build_bowtie,
}


def build_named(spec: str) -> MetricGraph:
    """Resolve ``octahedron``, ``cube``, ``bowtie``, ``complete:V``, ``cycle:n``, ``interval:l``."""
    name, _, arg = spec.partition(":")
    if name in BUILDERS and not arg:
        return BUILDERS[name]()
    if name == "complete" and arg:
        return build_complete(int(arg))
    if name == "cycle" and arg:
        return build_cycle(int(arg))
    if name == "interval" and arg:
        return build_interval(float(arg))
    raise ValueError(f"unknown graph builder {spec!r}")


# -- matrices -------------------------------------------------------------------

def adjacency_matrix(graph: MetricGraph) -> np.ndarray:
    """``A[i, j] = 1`` iff the directed edge j -> i exists (symmetric for our graphs)."""
    A = np.zeros((graph.vertex_count, graph.vertex_count), dtype=np.int64)
    for u, v in graph.edges:
        A[u, v] = A[v, u] = 1
    return A


# -- edge-list files --------------------------------------------------------------

def parse_graph_file(text: str, name: str = "graph") -> MetricGraph:
    """Parse ``u v length`` lines; ``#`` starts a comment line, blank lines are skipped."""
    edges, lengths, seen = [], [], {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise MalformedLineError(f"expected 'u v length', got {raw!r}", line_no)
        try:
            u, v = int(parts[0]), int(parts[1])
            length = float(parts[2])
        except ValueError:
            raise MalformedLineError(f"cannot parse {raw!r}", line_no) from None
        if u < 0 or v < 0:
            raise MalformedLineError("vertex ids must be non-negative", line_no)
        if u == v:
            raise LoopEdgeError(f"loop at vertex {u}", line_no)
        if not (length > 0 and math.isfinite(length)):
            raise NonPositiveLengthError(f"non-positive length {parts[2]}", line_no)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParallelEdgeError(
                f"parallel edge {key} (first seen on line {seen[key]})", line_no)
        seen[key] = line_no
        edges.append((u, v))
        lengths.append(length)
    if not edges:
        raise GraphFileError("no edges found")
    vertex_count = 1 + max(max(e) for e in edges)
    return from_edges(vertex_count, edges, lengths, name=name)


def format_graph(graph: MetricGraph) -> str:
    graph._require_lengths()
    lines = [f"# {graph.name}: {graph.vertex_count} vertices, {graph.edge_count} edges"]
    lines += [f"{u} {v} {length:.17g}" for (u, v), length in zip(graph.edges, graph.lengths)]
    return "\n".join(lines) + "\n"


def read_graph(path) -> MetricGraph:
    from pathlib import Path

    p = Path(path)
    return parse_graph_file(p.read_text(encoding="utf-8"), name=p.stem)
