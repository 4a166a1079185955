"""Exact induced 3- and 4-vertex subgraph counts of ego networks.

Counting goes through non-induced pattern counts, which are cheap to obtain
from degrees, codegrees, per-edge triangle counts and a 4-clique count, and
are then mapped to induced counts by the inverse of the containment matrix.
The containment matrix is derived at import time by enumerating edge subsets
of every labelled graph on 3 and 4 vertices.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from pathlib import Path

import numpy as np
from scipy import sparse

from . import catalog
from .canon import canonical_code
from .errors import EmptyCloudError, OracleTooLargeError
from .graph import Graph, ego_network

log = logging.getLogger(__name__)

ORDER3 = catalog.names(3)
ORDER4 = catalog.names(4)
ALL_NAMES = ORDER3 + ORDER4


@lru_cache(maxsize=None)
def pattern_table(k: int) -> dict[int, str]:
    """Map the k-vertex labelled adjacency pattern (bit per pair) to a catalogue name."""
    pairs = list(combinations(range(k), 2))
    by_code = {c.canonical_code: c.name for c in catalog.catalog() if c.order == k}
    table = {}
    for mask in range(1 << len(pairs)):
        edges = [p for b, p in enumerate(pairs) if mask >> b & 1]
        table[mask] = by_code[canonical_code(Graph.from_edges(k, edges))]
    return table


@lru_cache(maxsize=None)
def containment_matrix(k: int) -> np.ndarray:
    """``A[h, f]`` = number of spanning subgraphs of class ``f`` isomorphic to class ``h``.

    Rows and columns follow catalogue order for order ``k``.
    """
    names = catalog.names(k)
    table = pattern_table(k)
    npairs = k * (k - 1) // 2
    A = np.zeros((len(names), len(names)), dtype=np.int64)
    done = set()
    for mask in range(1 << npairs):
        f = table[mask]
        if f in done:
            continue
        done.add(f)
        col = names.index(f)
        sub = mask
        # every submask of the edge set, including the empty one
        while True:
            A[names.index(table[sub]), col] += 1
            if sub == 0:
                break
            sub = (sub - 1) & mask
    return A


@lru_cache(maxsize=None)
def induced_from_noninduced(k: int) -> np.ndarray:
    """Exact integer inverse of :func:`containment_matrix`."""
    A = containment_matrix(k)
    n = A.shape[0]
    # A is unitriangular after sorting by edge count; solve exactly with Fractions
    M = [[Fraction(int(A[i, j])) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for c in range(n):
        p = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[p] = M[p], M[c]
        piv = M[c][c]
        M[c] = [x / piv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    inv = np.array([[M[i][n + j] for j in range(n)] for i in range(n)], dtype=object)
    assert all(x.denominator == 1 for x in inv.flat)
    return np.array([[int(x) for x in row] for row in inv], dtype=object)


@dataclass
class MotifCensus:
    """Induced counts of all 15 catalogue classes inside one graph."""

    order3_counts: dict[str, int]
    order4_counts: dict[str, int]
    n: int
    m: int

    def count(self, name: str) -> int:
        name = catalog.get(name).name
        return self.order3_counts[name] if name in self.order3_counts else self.order4_counts[name]

    def counts(self) -> list[int]:
        return [self.order3_counts[k] for k in ORDER3] + [self.order4_counts[k] for k in ORDER4]

    def density(self, name: str) -> Fraction:
        order = catalog.get(name).order
        total = comb(self.n, order)
        return Fraction(self.count(name), total) if total else Fraction(0)

    def edge_density(self) -> Fraction:
        total = comb(self.n, 2)
        return Fraction(self.m, total) if total else Fraction(0)

    def check(self) -> None:
        assert sum(self.order3_counts.values()) == comb(self.n, 3)
        assert sum(self.order4_counts.values()) == comb(self.n, 4)
        assert all(v >= 0 for v in self.counts())


def _adjacency(ego: Graph) -> sparse.csr_matrix:
    n = ego.vertex_count
    rows = np.fromiter((u for u, nb in enumerate(ego.adjacency) for _ in nb), dtype=np.int64)
    cols = np.fromiter((v for nb in ego.adjacency for v in nb), dtype=np.int64)
    data = np.ones(len(rows), dtype=np.int64)
    return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))


def _four_cliques(A: sparse.csr_matrix, deg: np.ndarray) -> int:
    """4-cliques as triangles inside degree-ordered out-neighbourhoods."""
    n = A.shape[0]
    rank = np.empty(n, dtype=np.int64)
    rank[np.lexsort((np.arange(n), deg))] = np.arange(n)
    total = 0
    indptr, indices = A.indptr, A.indices
    for u in range(n):
        nb = indices[indptr[u]:indptr[u + 1]]
        out = nb[rank[nb] > rank[u]]
        if len(out) < 3:
            continue
        sub = A[out][:, out].toarray().astype(np.float64)
        # trace(B^3) / 6 counts triangles; exact while below 2**53
        total += int(round(float(((sub @ sub) * sub).sum()))) // 6
    return total


def noninduced_counts(ego: Graph) -> tuple[list[int], list[int]]:
    """Non-induced 3- and 4-vertex pattern counts in catalogue order."""
    n, m = ego.vertex_count, ego.edge_count
    if m == 0:
        return ([comb(n, 3), 0, 0, 0], [comb(n, 4)] + [0] * 10)
    A = _adjacency(ego)
    deg = np.asarray(A.sum(axis=1)).ravel()
    C = (A @ A).tocsr()
    tri_edge = A.multiply(C).tocsr()  # entry (u,v) = triangles through edge uv
    tri_edge_vals = tri_edge.data
    t = int(tri_edge_vals.sum()) // 6
    tri_vertex = np.asarray(tri_edge.sum(axis=1)).ravel() // 2

    degs = [int(d) for d in deg]
    wedges = sum(d * (d - 1) // 2 for d in degs)
    stars = sum(d * (d - 1) * (d - 2) // 6 for d in degs)

    coo = A.tocoo()
    upper = coo.row < coo.col
    eu, ev = coo.row[upper], coo.col[upper]
    paths3 = int(((deg[eu] - 1) * (deg[ev] - 1)).sum()) - 3 * t
    tailed = int((tri_vertex * (deg - 2)).sum())
    cu = C.tocoo()
    off = cu.row < cu.col
    c = cu.data[off].astype(np.int64)
    cycles4 = int((c * (c - 1) // 2).sum()) // 2
    te = tri_edge.tocoo()
    tup = te.data[te.row < te.col].astype(np.int64)
    diamonds = int((tup * (tup - 1) // 2).sum())
    k4 = _four_cliques(A, deg)

    order3 = [comb(n, 3), m * (n - 2), wedges, t]
    order4 = [
        comb(n, 4),
        m * comb(n - 2, 2),
        m * (m - 1) // 2 - wedges,
        wedges * (n - 3),
        t * (n - 3),
        stars,
        paths3,
        tailed,
        cycles4,
        diamonds,
        k4,
    ]
    return order3, order4


def census(ego: Graph) -> MotifCensus:
    """Exact induced counts of the 4 three-vertex and 11 four-vertex classes."""
    nc3, nc4 = noninduced_counts(ego)
    inv3, inv4 = induced_from_noninduced(3), induced_from_noninduced(4)
    ind3 = [sum(int(inv3[i, j]) * nc3[j] for j in range(4)) for i in range(4)]
    ind4 = [sum(int(inv4[i, j]) * nc4[j] for j in range(11)) for i in range(11)]
    return MotifCensus(dict(zip(ORDER3, ind3)), dict(zip(ORDER4, ind4)), ego.vertex_count, ego.edge_count)


def brute_force_census(ego: Graph, k: int, limit: int = 10**7) -> dict[str, int]:
    """Classify every k-subset directly (test oracle)."""
    n = ego.vertex_count
    if comb(n, k) > limit:
        raise OracleTooLargeError(f"C({n},{k}) exceeds oracle limit {limit}")
    table = pattern_table(k)
    rows = ego.bitmasks()
    pairs = list(combinations(range(k), 2))
    counts = dict.fromkeys(catalog.names(k), 0)
    for subset in combinations(range(n), k):
        mask = 0
        for b, (i, j) in enumerate(pairs):
            if rows[subset[i]] >> subset[j] & 1:
                mask |= 1 << b
        counts[table[mask]] += 1
    return counts


@dataclass
class PointCloud:
    """Localised point cloud: one (edge density, target density) pair per ego."""

    target: str
    vertices: np.ndarray
    degrees: np.ndarray
    x: np.ndarray
    y: np.ndarray
    min_degree: int = 10
    exact: list[tuple[Fraction, Fraction]] = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.x)

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def to_csv(self, path, comment: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if comment:
                fh.write(f"# {comment}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["vertex", "degree", "x", "y"])
            for v, d, x, y in zip(self.vertices, self.degrees, self.x, self.y):
                w.writerow([int(v), int(d), format(float(x), ".17g"), format(float(y), ".17g")])

    @classmethod
    def from_csv(cls, path, target: str, min_degree: int = 0) -> "PointCloud":
        with open(path) as fh:
            body = [ln for ln in fh if not ln.startswith("#")]
        data = np.genfromtxt(io.StringIO("".join(body)), delimiter=",", names=True, dtype=None, encoding=None)
        data = np.atleast_1d(data)
        return cls(
            target,
            np.asarray(data["vertex"], dtype=np.int64),
            np.asarray(data["degree"], dtype=np.int64),
            np.asarray(data["x"], dtype=np.float64),
            np.asarray(data["y"], dtype=np.float64),
            min_degree,
        )


@dataclass
class EgoCensusTable:
    """One census per qualifying vertex; clouds for every target are views of it."""

    vertices: list[int]
    labels: list[int]
    degrees: list[int]
    censuses: list[MotifCensus]
    min_degree: int

    def cloud(self, target: str) -> PointCloud:
        target = catalog.get(target).name
        order = catalog.get(target).order
        keep = [i for i, d in enumerate(self.degrees) if d >= order]
        if not keep:
            raise EmptyCloudError(f"no vertex with degree >= {max(self.min_degree, order)}")
        exact = [(self.censuses[i].edge_density(), self.censuses[i].density(target)) for i in keep]
        return PointCloud(
            target,
            np.array([self.labels[i] for i in keep], dtype=np.int64),
            np.array([self.degrees[i] for i in keep], dtype=np.int64),
            np.array([_to_float(self.censuses[i].m, comb(self.degrees[i], 2)) for i in keep]),
            np.array([_to_float(self.censuses[i].count(target), comb(self.degrees[i], order)) for i in keep]),
            self.min_degree,
            exact,
        )

    def write_dump(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["vertex", "degree"] + ALL_NAMES)
            for lab, d, c in zip(self.labels, self.degrees, self.censuses):
                w.writerow([lab, d] + c.counts())


def _to_float(num: int, den: int) -> float:
    # int / int true division is correctly rounded
    return num / den if den else 0.0


_SHARED: Graph | None = None


def _init_worker(g: Graph) -> None:
    global _SHARED
    _SHARED = g


def _census_chunk(vertices: list[int]) -> list[MotifCensus]:
    return [census(ego_network(_SHARED, v)) for v in vertices]


def ego_censuses(g: Graph, min_degree: int = 10, workers: int = 1, chunk: int = 256) -> EgoCensusTable:
    """Census every ego network whose centre has degree at least ``min_degree``."""
    degrees = g.degrees
    vertices = [v for v in range(g.vertex_count) if degrees[v] >= min_degree]
    if not vertices:
        raise EmptyCloudError(f"no vertex with degree >= {min_degree}")
    if workers <= 1:
        results = [census(ego_network(g, v)) for v in vertices]
    else:
        chunks = [vertices[i:i + chunk] for i in range(0, len(vertices), chunk)]
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(g,)) as ex:
            results = [c for part in ex.map(_census_chunk, chunks) for c in part]
    log.info("censused %d ego networks", len(vertices))
    return EgoCensusTable(vertices, [g.labels[v] for v in vertices], [degrees[v] for v in vertices], results, min_degree)


def localized_point_cloud(g: Graph, target: str, min_degree: int = 10, workers: int = 1) -> PointCloud:
    return ego_censuses(g, min_degree, workers).cloud(target)


def localized_point_clouds(g: Graph, targets=None, min_degree: int = 10, workers: int = 1) -> dict[str, PointCloud]:
    table = ego_censuses(g, min_degree, workers)
    return {t: table.cloud(t) for t in (targets or ALL_NAMES)}


def x_axis_coverage(cloud: PointCloud, lo: float = 0.05, hi: float = 0.95) -> bool:
    if len(cloud) == 0:
        raise EmptyCloudError("coverage of an empty cloud")
    return bool(cloud.x.min() <= lo and cloud.x.max() >= hi)
