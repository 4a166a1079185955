"""Outlier pruning, covered-area estimation and the subgraph spread ratio."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree
from scipy.spatial import Delaunay, QhullError, cKDTree
from scipy.spatial.distance import pdist, squareform

from .census import PointCloud
from .errors import DegenerateParametersError
from .region import FeasibleRegion, bin_index, region_area, snap_subdomain

MC_CHUNK = 1 << 16


@dataclass(frozen=True)
class PruneParams:
    alpha: float = 0.95
    epsilon: float = 1e-6
    lb: float = 0.0
    ub: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise DegenerateParametersError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 < self.epsilon < self.ub - self.lb:
            raise DegenerateParametersError(f"need 0 < epsilon < ub - lb, got epsilon={self.epsilon}, [{self.lb}, {self.ub}]")


class _DisjointSet:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra < rb:
                ra, rb = rb, ra
            self.parent[ra] = rb
        return ra != rb


def _close(a: np.ndarray, b: np.ndarray, r2: float) -> bool:
    """Whether some point of ``a`` lies strictly closer than ``sqrt(r2)`` to some point of ``b``."""
    step = max(1, 4_000_000 // max(len(b), 1))
    for s in range(0, len(a), step):
        d = a[s:s + step, None, :] - b[None, :, :]
        if np.any(np.einsum("ijk,ijk->ij", d, d) < r2):
            return True
    return False


def threshold_components(points: np.ndarray, r: float) -> np.ndarray:
    """Component labels of the graph joining points at distance ``< r``.

    Points are hashed into square cells of side ``r / sqrt(2)``; a cell's
    points are mutually connected, and only cells at most two apart on each
    axis can hold connected pairs.
    """
    n = len(points)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if r <= 0:
        return np.arange(n)
    side = r / math.sqrt(2)
    keys = np.floor(points / side).astype(np.int64)
    cells, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[order], np.arange(len(cells) + 1))
    members = [order[bounds[c]:bounds[c + 1]] for c in range(len(cells))]
    lookup = {(int(x), int(y)): c for c, (x, y) in enumerate(cells)}
    dsu = _DisjointSet(len(cells))
    r2 = r * r
    offsets = [(dx, dy) for dx in range(-2, 3) for dy in range(-2, 3) if (dx, dy) > (0, 0)]
    for c, (x, y) in enumerate(cells):
        x, y = int(x), int(y)
        for dx, dy in offsets:
            other = lookup.get((x + dx, y + dy))
            if other is None or dsu.find(c) == dsu.find(other):
                continue
            if _close(points[members[c]], points[members[other]], r2):
                dsu.union(c, other)
    roots = np.array([dsu.find(c) for c in range(len(cells))])
    return roots[inverse]


@dataclass
class PruneResult:
    kept: np.ndarray
    diameter: float
    iterations: int
    history: list[tuple[float, float]] = field(default_factory=list)
    ub_raised: bool = False


def spanning_edges(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Euclidean minimum spanning forest of distinct points as ``(u, v, length)``.

    Two points are joined in the ``< r`` threshold graph exactly when the
    tree path between them has all edges shorter than ``r``, so one tree
    answers every threshold of the bisection.
    """
    n = len(points)
    if n < 2:
        return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0)
    graph = None
    if n > 2000:
        try:
            tri = Delaunay(points)
            s = tri.simplices
            u = np.concatenate([s[:, 0], s[:, 1], s[:, 2]])
            v = np.concatenate([s[:, 1], s[:, 2], s[:, 0]])
            w = np.linalg.norm(points[u] - points[v], axis=1)
            graph = coo_matrix((w, (u, v)), shape=(n, n)).tocsr()
        except QhullError:
            graph = None
    if graph is None:
        if n > 20000:
            return _collinear_spanning_edges(points)
        graph = squareform(pdist(points))
    t = minimum_spanning_tree(graph).tocoo()
    return t.row.astype(np.int64), t.col.astype(np.int64), t.data


def _collinear_spanning_edges(points):
    # Qhull rejects only collinear inputs here; consecutive points along the line form the tree
    order = np.lexsort((points[:, 1], points[:, 0]))
    u, v = order[:-1], order[1:]
    return u, v, np.linalg.norm(points[u] - points[v], axis=1)


def _largest(tree, n: int, weights: np.ndarray, first_index: np.ndarray, r: float):
    u, v, w = tree
    keep = w < r
    adj = coo_matrix((np.ones(int(keep.sum())), (u[keep], v[keep])), shape=(n, n))
    _, labels = connected_components(adj, directed=False)
    size = np.bincount(labels, weights=weights)
    smallest = np.full(len(size), np.iinfo(np.int64).max)
    np.minimum.at(smallest, labels, first_index)
    # largest weight, ties to the component holding the smallest point index
    best = int(np.lexsort((smallest, -size))[0])
    return labels == best, float(size[best])


def prune(cloud, params: PruneParams = PruneParams()) -> PruneResult:
    """Bisect the connection threshold until the largest component holds ``alpha`` of the points.

    Identical points are merged and counted with multiplicity.  The returned
    component is the one at the final upper bound, so it always holds at
    least ``alpha`` of the points.
    """
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)
    n = len(pts)
    if n < 2:
        raise DegenerateParametersError("pruning needs at least two points")
    if params.alpha * n < 1:
        raise DegenerateParametersError(f"alpha * n = {params.alpha * n} < 1")
    uniq, inverse, counts = np.unique(pts, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    first = np.full(len(uniq), n, dtype=np.int64)
    np.minimum.at(first, inverse, np.arange(n))
    weights = counts.astype(np.float64)
    need = params.alpha * n
    tree = spanning_edges(uniq)
    m = len(uniq)

    lb, ub = params.lb, params.ub
    raised = False
    if _largest(tree, m, weights, first, ub)[1] < need:
        span = np.ptp(uniq, axis=0)
        ub = max(ub, float(np.hypot(*span)) * (1 + 1e-9) + 1e-12)
        raised = True
    history = []
    iterations = 0
    while ub - lb > params.epsilon:
        mid = (ub + lb) / 2
        _, size = _largest(tree, m, weights, first, mid)
        history.append((mid, size / n))
        if size < need:
            lb = mid
        else:
            ub = mid
        iterations += 1
    ordered = sorted(history)
    assert all(a[1] <= b[1] for a, b in zip(ordered, ordered[1:])), "largest component must grow with the threshold"
    mask, size = _largest(tree, m, weights, first, ub)
    assert size >= need
    kept = np.flatnonzero(mask[inverse])
    return PruneResult(kept, ub, iterations, history, raised)


def outlier_mask(n: int, kept) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[np.asarray(kept, dtype=np.int64)] = False
    return mask


def _chunk_hits(c, k, seed, x_lo, x_hi, ymax, tree, radius, region):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(c,))))
    u = rng.random((k, 2))
    x = x_lo + u[:, 0] * (x_hi - x_lo)
    y = u[:, 1] * ymax
    inside = region.contains(x, y)
    if not inside.any() or radius <= 0:
        return 0
    d, _ = tree.query(np.column_stack([x[inside], y[inside]]), k=1, distance_upper_bound=radius)
    return int(np.count_nonzero(d < radius))


def covered_area(points, diameter: float, region: FeasibleRegion, sub=(0.0, 1.0), samples: int = 10**6,
                 seed: int = 0, workers: int = 1) -> tuple[float, float]:
    """Monte Carlo area of (union of balls of diameter ``diameter``) within the region's step area.

    Samples are uniform on ``[x_lo, x_hi] x [0, max upper on sub]``.  The
    sample stream is split into fixed chunks, each seeded from ``(seed,
    chunk)``, so the estimate does not depend on ``workers``.  Returns the
    estimate and its standard error.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        raise DegenerateParametersError("no points to cover")
    if samples < 10**4:
        raise DegenerateParametersError(f"at least 10^4 samples required, got {samples}")
    x_lo, x_hi = sub
    first, last = snap_subdomain(x_lo, x_hi, region.bins)
    ymax = float(region.upper[first:last].max())
    if ymax <= 0:
        raise DegenerateParametersError("zero-height sampling rectangle")
    tree = cKDTree(pts)
    radius = diameter / 2
    sizes = [min(MC_CHUNK, samples - s) for s in range(0, samples, MC_CHUNK)]
    args = [(c, k, seed, x_lo, x_hi, ymax, tree, radius, region) for c, k in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            hits = sum(ex.map(lambda a: _chunk_hits(*a), args))
    else:
        hits = sum(_chunk_hits(*a) for a in args)
    rect = (x_hi - x_lo) * ymax
    p = hits / samples
    return p * rect, math.sqrt(p * (1 - p) / samples) * rect


@dataclass
class SpreadResult:
    target: str
    kept: list[int]
    diameter: float
    covered_area: float
    covered_stderr: float
    region_area: float
    subdomain: tuple[float, float]
    ratio: float
    mc_samples: int
    seed: int
    alpha: float
    epsilon: float
    lb: float
    ub: float
    n_points: int
    region_provenance: str = ""
    iterations: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["subdomain"] = list(self.subdomain)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "SpreadResult":
        d = dict(d)
        d["subdomain"] = tuple(d["subdomain"])
        return cls(**d)


def kept_subdomain(xs: np.ndarray, bins: int) -> tuple[float, float]:
    """``[min x, max x]`` snapped outward to bin edges."""
    lo = bin_index(float(np.min(xs)), bins)
    hi = bin_index(float(np.max(xs)), bins)
    return lo / bins, (hi + 1) / bins


def spread_ratio(cloud, region: FeasibleRegion, params: PruneParams = PruneParams(), samples: int = 10**6,
                 seed: int = 0, workers: int = 1, target: str | None = None) -> SpreadResult:
    """Covered fraction of the feasible region over the subdomain of the pruned cloud."""
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)
    pr = prune(pts, params)
    kept_pts = pts[pr.kept]
    sub = kept_subdomain(kept_pts[:, 0], region.bins)
    covered, stderr = covered_area(kept_pts, pr.diameter, region, sub, samples, seed, workers)
    total = region_area(region, sub)
    if total <= 0:
        raise DegenerateParametersError(f"feasible region has zero area on {sub}")
    ratio = min(max(covered / total, 0.0), 1.0)
    name = target or getattr(cloud, "target", None) or region.target
    return SpreadResult(
        name, [int(k) for k in pr.kept], pr.diameter, covered, stderr, total, sub, ratio, samples, seed,
        params.alpha, params.epsilon, params.lb, params.ub, len(pts), region.provenance, pr.iterations,
    )
