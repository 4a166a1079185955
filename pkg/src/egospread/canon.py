"""Canonical labelling and isomorphism-class enumeration for small graphs.

Codes are computed by colour refinement followed by a backtracking search
over individualised vertices.  The code of a graph is the smallest
upper-triangle adjacency bitstring over all leaves of the search tree, read
with the pair ``(0, 1)`` as the most significant bit.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, permutations
from typing import NamedTuple

from .errors import UnsupportedSizeError
from .graph import Graph

MAX_CANON_ORDER = 10
MAX_ENUM_ORDER = 8


class CanonicalCode(NamedTuple):
    order: int
    bits: int

    @property
    def edge_count(self) -> int:
        return self.bits.bit_count() if hasattr(self.bits, "bit_count") else bin(self.bits).count("1")

    def bitstring(self) -> str:
        width = self.order * (self.order - 1) // 2
        return format(self.bits, f"0{width}b") if width else ""

    def graph(self) -> Graph:
        return graph_from_code(self)


@lru_cache(maxsize=None)
def _pairs(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(combinations(range(n), 2))


def rows_to_bits(rows: list[int], order: list[int]) -> int:
    """Upper-triangle bits of the graph relabelled so vertex ``order[i]`` sits at ``i``."""
    n = len(order)
    bits = 0
    for i in range(n):
        ri = rows[order[i]]
        for j in range(i + 1, n):
            bits = (bits << 1) | (ri >> order[j] & 1)
    return bits


def graph_from_code(code: CanonicalCode) -> Graph:
    n, bits = code
    pairs = _pairs(n)
    width = len(pairs)
    edges = [p for k, p in enumerate(pairs) if bits >> (width - 1 - k) & 1]
    return Graph.from_edges(n, edges)


def _refine(rows: list[int], colors: list[int]) -> list[int]:
    n = len(rows)
    ncolors = len(set(colors))
    while True:
        sigs = []
        for v in range(n):
            r = rows[v]
            nb = sorted(colors[w] for w in range(n) if r >> w & 1)
            sigs.append((colors[v], tuple(nb)))
        ranking = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranking[s] for s in sigs]
        k = len(ranking)
        if k == ncolors:
            return new
        colors, ncolors = new, k


def _search(rows: list[int], colors: list[int], best: list[int]) -> None:
    n = len(rows)
    counts: dict[int, int] = {}
    for c in colors:
        counts[c] = counts.get(c, 0) + 1
    if len(counts) == n:
        order = sorted(range(n), key=colors.__getitem__)
        bits = rows_to_bits(rows, order)
        if best[0] < 0 or bits < best[0]:
            best[0] = bits
        return
    # first non-singleton cell in colour order
    target = min(c for c, k in counts.items() if k > 1)
    cell = [v for v in range(n) if colors[v] == target]
    tried: list[int] = []
    for w in cell:
        # swapping twins is an automorphism fixing the current colouring
        if any((rows[w] & ~(1 << u)) == (rows[u] & ~(1 << w)) for u in tried):
            continue
        tried.append(w)
        split = [2 * c for c in colors]
        split[w] -= 1
        _search(rows, _refine(rows, split), best)


def canonical_bits(rows: list[int]) -> int:
    n = len(rows)
    if n <= 1:
        return 0
    degrees = [r.bit_count() if hasattr(r, "bit_count") else bin(r).count("1") for r in rows]
    best = [-1]
    _search(rows, _refine(rows, degrees), best)
    return best[0]


def canonical_code(g: Graph) -> CanonicalCode:
    """Relabelling-invariant code of ``g`` (order at most 10)."""
    if g.vertex_count > MAX_CANON_ORDER:
        raise UnsupportedSizeError(f"canonical codes limited to order {MAX_CANON_ORDER}, got {g.vertex_count}")
    return CanonicalCode(g.vertex_count, canonical_bits(g.bitmasks()))


def code_of_rows(rows: list[int]) -> CanonicalCode:
    return CanonicalCode(len(rows), canonical_bits(rows))


def brute_force_code(g: Graph) -> CanonicalCode:
    """Minimum upper-triangle bitstring over all n! relabellings (test oracle)."""
    rows = g.bitmasks()
    n = g.vertex_count
    return CanonicalCode(n, min(rows_to_bits(rows, list(p)) for p in permutations(range(n))))


def _sort_key(code: CanonicalCode):
    return (code.edge_count, code.bits)


@lru_cache(maxsize=None)
def _classes_by_augmentation(n: int) -> tuple[CanonicalCode, ...]:
    if n == 1:
        return (CanonicalCode(1, 0),)
    found = set()
    for parent in _classes_by_augmentation(n - 1):
        base = graph_from_code(parent).bitmasks()
        for mask in range(1 << (n - 1)):
            rows = [r | ((mask >> v & 1) << (n - 1)) for v, r in enumerate(base)]
            rows.append(mask)
            found.add(canonical_bits(rows))
    return tuple(sorted((CanonicalCode(n, b) for b in found), key=_sort_key))


def enumerate_graph_classes(n: int) -> list[CanonicalCode]:
    """One code per isomorphism class on ``n`` vertices, sorted by (edges, code)."""
    if not 1 <= n <= MAX_ENUM_ORDER:
        raise UnsupportedSizeError(f"class enumeration supports 1 <= n <= {MAX_ENUM_ORDER}, got {n}")
    return list(_classes_by_augmentation(n))


def enumerate_by_filtering(n: int) -> list[CanonicalCode]:
    """Independent enumerator: canonicalise every labelled graph on ``n`` vertices."""
    if not 1 <= n <= 6:
        raise UnsupportedSizeError("filtering enumerator is exhaustive; limited to n <= 6")
    pairs = _pairs(n)
    found = set()
    for mask in range(1 << len(pairs)):
        rows = [0] * n
        for k, (i, j) in enumerate(pairs):
            if mask >> k & 1:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
        found.add(canonical_bits(rows))
    return sorted((CanonicalCode(n, b) for b in found), key=_sort_key)


def complement_code(code: CanonicalCode) -> CanonicalCode:
    return canonical_code(graph_from_code(code).complement())
