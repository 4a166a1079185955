"""Simple undirected graphs, edge-list ingestion and ego networks."""

from __future__ import annotations

import gzip
import io
import re
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable

from .errors import ParseError

_SPLIT = re.compile(r"[,\s]+")


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple graph on vertices ``0..n-1``.

    ``adjacency[v]`` is a sorted tuple of neighbours.  ``labels`` maps each
    compact id back to the id it had in the input file (identity when the
    graph was built directly).
    """

    vertex_count: int
    adjacency: tuple[tuple[int, ...], ...]
    labels: tuple[int, ...] = ()
    stats: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], labels=None, stats=None) -> "Graph":
        nbrs = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                continue
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for {n} vertices")
            nbrs[u].add(v)
            nbrs[v].add(u)
        adjacency = tuple(tuple(sorted(s)) for s in nbrs)
        labels = tuple(labels) if labels is not None else tuple(range(n))
        return cls(n, adjacency, labels, dict(stats or {}))

    @property
    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    @property
    def edges(self) -> set[tuple[int, int]]:
        return {(u, v) for u, nb in enumerate(self.adjacency) for v in nb if u < v}

    def sorted_edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, nb in enumerate(self.adjacency) for v in nb if u < v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def induced(self, vertices: Iterable[int]) -> "Graph":
        """Induced subgraph; vertex ``i`` of the result is ``vertices[i]``."""
        vs = list(vertices)
        index = {v: i for i, v in enumerate(vs)}
        edges = []
        for i, v in enumerate(vs):
            for w in self.adjacency[v]:
                j = index.get(w)
                if j is not None and i < j:
                    edges.append((i, j))
        return Graph.from_edges(len(vs), edges, labels=[self.labels[v] for v in vs])

    def complement(self) -> "Graph":
        n = self.vertex_count
        adj = [set(a) for a in self.adjacency]
        edges = [(u, v) for u, v in combinations(range(n), 2) if v not in adj[u]]
        return Graph.from_edges(n, edges, labels=self.labels)

    def bitmasks(self) -> list[int]:
        """Adjacency rows as Python int bitsets."""
        rows = []
        for nb in self.adjacency:
            mask = 0
            for w in nb:
                mask |= 1 << w
            rows.append(mask)
        return rows

    def same_structure(self, other: "Graph") -> bool:
        return self.vertex_count == other.vertex_count and self.adjacency == other.adjacency

    def summary(self) -> dict:
        return {
            "vertices": self.vertex_count,
            "edges": self.edge_count,
            "self_loops_dropped": self.stats.get("self_loops_dropped", 0),
            "duplicates_collapsed": self.stats.get("duplicates_collapsed", 0),
        }

    def to_edge_list(self, original_ids: bool = True) -> str:
        lab = self.labels if original_ids else range(self.vertex_count)
        return "".join(f"{lab[u]} {lab[v]}\n" for u, v in self.sorted_edges())

    def __repr__(self):
        return f"Graph(n={self.vertex_count}, m={self.edge_count})"


def load_edge_list(source, dedupe: bool = True, drop_self_loops: bool = True, relabel: bool = True) -> Graph:
    """Parse a whitespace/comma separated edge list.

    ``source`` may be a path, an open text stream or the text itself.  Lines
    starting with ``#`` or ``%`` are comments, and a single non-numeric
    header row before the first edge (``id_1,id_2``) is skipped.  Ids are compacted to
    ``0..n-1`` in order of first appearance unless ``relabel`` is false, in
    which case ids must already be nonnegative and are used directly.
    """
    text = _read_text(source)
    ids: dict[int, int] = {}
    order: list[int] = []
    raw_edges: list[tuple[int, int]] = []
    loops = 0
    header_seen = False
    for lineno, line in enumerate(io.StringIO(text), start=1):
        line = line.strip()
        if not line or line[0] in "#%":
            continue
        tokens = [t for t in _SPLIT.split(line) if t]
        if len(tokens) != 2:
            raise ParseError(f"expected 2 tokens, got {len(tokens)}", lineno)
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            if not order and not header_seen and not any(t.lstrip("-").isdigit() for t in tokens):
                header_seen = True
                continue
            raise ParseError(f"non-integer token in {line!r}", lineno) from None
        if a < 0 or b < 0:
            raise ParseError("negative vertex id", lineno)
        for x in (a, b):
            if x not in ids:
                ids[x] = len(order)
                order.append(x)
        if a == b:
            loops += 1
            if drop_self_loops:
                continue
            raise ParseError("self-loop in simple graph input", lineno)
        raw_edges.append((a, b))
    if not order:
        raise ParseError("empty edge list")

    if relabel:
        labels = order
        edges = [(ids[a], ids[b]) for a, b in raw_edges]
    else:
        n = max(order) + 1
        labels = list(range(n))
        edges = raw_edges
    seen = set()
    unique = []
    for u, v in edges:
        key = (u, v) if u < v else (v, u)
        if key in seen:
            if not dedupe:
                raise ParseError(f"duplicate edge {labels[u]} {labels[v]}")
            continue
        seen.add(key)
        unique.append(key)
    stats = {"self_loops_dropped": loops, "duplicates_collapsed": len(edges) - len(unique)}
    return Graph.from_edges(len(labels), unique, labels=labels, stats=stats)


def _read_text(source) -> str:
    if isinstance(source, (str, Path)) and str(source).endswith(".gz") and Path(source).is_file():
        with gzip.open(source, "rt") as fh:
            return fh.read()
    if isinstance(source, Path):
        return source.read_text()
    if hasattr(source, "read"):
        return source.read()
    if isinstance(source, str) and "\n" not in source and Path(source).is_file():
        return Path(source).read_text()
    return str(source)


def ego_network(g: Graph, v: int) -> Graph:
    """Subgraph induced by the neighbours of ``v`` (``v`` excluded)."""
    if not 0 <= v < g.vertex_count:
        raise IndexError(f"vertex {v} not in graph of order {g.vertex_count}")
    return g.induced(g.adjacency[v])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, combinations(range(n), 2))


def empty_graph(n: int) -> Graph:
    return Graph.from_edges(n, [])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


