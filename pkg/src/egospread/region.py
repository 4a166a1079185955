"""Per-bin step-function approximations of feasible (edge density, H density) regions."""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from math import comb
from pathlib import Path

import numpy as np

from . import catalog
from .canon import enumerate_graph_classes, graph_from_code
from .census import census
from .errors import RegionFormatError, WrongTargetError

FORMAT_VERSION = 1
DEFAULT_BINS = 100


@dataclass
class FeasibleRegion:
    """Bin ``i`` covers edge densities ``[i/N, (i+1)/N)``; ``x = 1`` falls in bin ``N-1``."""

    target: str
    bins: int
    upper: np.ndarray
    lower: np.ndarray
    provenance: str
    asymptotic: bool = True
    lower_placeholder: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.target = catalog.get(self.target).name
        self.upper = np.asarray(self.upper, dtype=np.float64)
        self.lower = np.asarray(self.lower, dtype=np.float64)
        self.validate()

    def validate(self) -> None:
        N = self.bins
        if N < 1 or self.upper.shape != (N,) or self.lower.shape != (N,):
            raise RegionFormatError(f"bin count {N} does not match bound arrays")
        if not (np.all(np.isfinite(self.upper)) and np.all(np.isfinite(self.lower))):
            raise RegionFormatError("non-finite bound")
        if np.any(self.lower < 0) or np.any(self.upper > 1) or np.any(self.lower > self.upper):
            bad = int(np.argmax((self.lower < 0) | (self.upper > 1) | (self.lower > self.upper)))
            raise RegionFormatError(
                f"bin {bad}: bounds violate 0 <= lower <= upper <= 1 "
                f"(lower={self.lower[bad]}, upper={self.upper[bad]})"
            )
        cls = catalog.get(self.target)
        if not (cls.is_complete or cls.is_empty) and np.any(self.lower != 0):
            raise RegionFormatError(f"{self.target} has a zero lower bound; got nonzero lower curve")

    @property
    def edges(self) -> np.ndarray:
        return np.arange(self.bins + 1) / self.bins

    def bin_index(self, x):
        return bin_index(x, self.bins)

    def contains(self, x, y) -> np.ndarray:
        """Vectorised membership of points in the step area."""
        i = bin_index(np.asarray(x, dtype=np.float64), self.bins)
        y = np.asarray(y, dtype=np.float64)
        return (y >= self.lower[i]) & (y <= self.upper[i])

    def peak_bin(self) -> int:
        """First bin attaining the maximum upper bound, preferring realised bins when recorded."""
        realized = self.meta.get("realized_bins")
        if realized:
            return max(realized, key=lambda i: (self.upper[i], -i))
        return int(np.argmax(self.upper))

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "target": self.target,
            "bins": self.bins,
            "provenance": self.provenance,
            "asymptotic": self.asymptotic,
            "lower_placeholder": self.lower_placeholder,
            "meta": self.meta,
            "lower": [repr(float(v)) for v in self.lower],
            "upper": [repr(float(v)) for v in self.upper],
        }

    def same_as(self, other: "FeasibleRegion") -> bool:
        return self.to_dict() == other.to_dict()


def bin_index(x, bins: int):
    """Half-open bin of each density; exact for floats on bin edges."""
    x = np.asarray(x, dtype=np.float64)
    i = np.floor(x * bins).astype(np.int64)
    # x*bins can round across an edge; compare against the float edge directly
    i = np.where((i + 1) / bins <= x, i + 1, i)
    i = np.where(i / bins > x, i - 1, i)
    i = np.clip(i, 0, bins - 1)
    return int(i) if i.ndim == 0 else i


def kruskal_katona_region(target: str, bins: int = DEFAULT_BINS) -> FeasibleRegion:
    """Upper curve ``e^(n/2)`` for cliques, ``(1-e)^(n/2)`` for empty graphs.

    The clique bound increases in ``e`` so it is taken at the right bin edge;
    the empty-graph bound decreases so it is taken at the left edge.  The
    lower curve is zero and flagged as a placeholder.
    """
    cls = catalog.get(target)
    if not (cls.is_complete or cls.is_empty):
        raise WrongTargetError(f"Kruskal-Katona bounds only apply to cliques and empty graphs, not {cls.name}")
    i = np.arange(bins, dtype=np.float64)
    if cls.is_complete:
        upper = ((i + 1) / bins) ** (cls.order / 2)
    else:
        upper = (1 - i / bins) ** (cls.order / 2)
    return FeasibleRegion(cls.name, bins, upper, np.zeros(bins), "kruskal-katona", True, lower_placeholder=True)


@lru_cache(maxsize=None)
def host_densities(n_host: int) -> tuple[tuple[Fraction, dict[str, Fraction]], ...]:
    """Edge density and the 15 induced densities for every class on ``n_host`` vertices."""
    out = []
    for code in enumerate_graph_classes(n_host):
        g = graph_from_code(code)
        c = census(g)
        out.append((c.edge_density(), {name: c.density(name) for name in catalog.names()}))
    return tuple(out)


def _fill_empty(values: list, pick) -> list:
    """Empty bins take ``pick`` of the nearest nonempty neighbours on each side."""
    n = len(values)
    filled = list(values)
    for i in range(n):
        if values[i] is not None:
            continue
        left = next((values[j] for j in range(i - 1, -1, -1) if values[j] is not None), None)
        right = next((values[j] for j in range(i + 1, n) if values[j] is not None), None)
        filled[i] = pick(v for v in (left, right) if v is not None)
    return filled


def brute_force_region(target: str, bins: int = DEFAULT_BINS, n_host: int = 7, minimize: bool = False) -> FeasibleRegion:
    """Exact per-bin extremes over all graphs on ``n_host`` vertices.

    Finite hosts only realise ``C(n_host, 2) + 1`` edge densities, so empty
    bins inherit the larger (or, for the minimum, smaller) neighbouring value.
    """
    cls = catalog.get(target)
    if n_host < cls.order:
        raise ValueError(f"host order {n_host} below target order {cls.order}")
    hi: list = [None] * bins
    lo: list = [None] * bins
    for e, dens in host_densities(n_host):
        i = min(int(e * bins), bins - 1)  # exact: e is a Fraction
        d = dens[cls.name]
        if hi[i] is None or d > hi[i]:
            hi[i] = d
        if lo[i] is None or d < lo[i]:
            lo[i] = d
    upper = [float(v) for v in _fill_empty(hi, max)]
    if minimize and (cls.is_complete or cls.is_empty):
        lower = [float(v) for v in _fill_empty(lo, min)]
    else:
        lower = [0.0] * bins
    return FeasibleRegion(
        cls.name, bins, upper, lower, f"brute-force({n_host})", asymptotic=False,
        meta={"n_host": n_host, "minimize": minimize, "realized_bins": [i for i, v in enumerate(hi) if v is not None]},
    )


def snap_subdomain(x_lo: float, x_hi: float, bins: int) -> tuple[int, int]:
    """Bin range ``[first, last)`` covering ``[x_lo, x_hi]``, snapped outward."""
    if not 0 <= x_lo < x_hi <= 1:
        raise ValueError(f"empty or invalid subdomain [{x_lo}, {x_hi}]")
    first = math.floor(x_lo * bins + 1e-9)
    last = math.ceil(x_hi * bins - 1e-9)
    first, last = max(first, 0), min(last, bins)
    if last <= first:
        raise ValueError(f"subdomain [{x_lo}, {x_hi}] covers no bin")
    return first, last


def region_area(r: FeasibleRegion, sub=(0.0, 1.0)) -> float:
    first, last = snap_subdomain(sub[0], sub[1], r.bins)
    total = 0.0
    for i in range(first, last):
        total += (r.upper[i] - r.lower[i]) / r.bins
    return total


def combine(upper_from: FeasibleRegion, lower_from: FeasibleRegion | None) -> FeasibleRegion:
    """Upper curve of one region with the lower curve of another (cliques, empty graphs)."""
    if lower_from is None:
        return upper_from
    if upper_from.target != lower_from.target or upper_from.bins != lower_from.bins:
        raise RegionFormatError("cannot combine regions of different targets or bin counts")
    lower = np.minimum(lower_from.lower, upper_from.upper)
    return FeasibleRegion(
        upper_from.target, upper_from.bins, upper_from.upper, lower,
        f"{upper_from.provenance}+lower:{lower_from.provenance}",
        upper_from.asymptotic and lower_from.asymptotic,
        meta={"upper": upper_from.meta, "lower": lower_from.meta},
    )


def save_region(r: FeasibleRegion, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(r.to_dict(), fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)


def region_from_dict(data: dict) -> FeasibleRegion:
    if data.get("version") != FORMAT_VERSION:
        raise RegionFormatError(f"unsupported region file version {data.get('version')!r}")
    try:
        bins = int(data["bins"])
        lower = [float(v) for v in data["lower"]]
        upper = [float(v) for v in data["upper"]]
        if len(lower) != bins or len(upper) != bins:
            raise RegionFormatError(f"header declares {bins} bins, file has {len(lower)}/{len(upper)}")
        return FeasibleRegion(
            data["target"], bins, upper, lower, data["provenance"], bool(data["asymptotic"]),
            bool(data.get("lower_placeholder", False)), dict(data.get("meta", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise RegionFormatError(f"malformed region file: {exc}") from exc


def load_region(path) -> FeasibleRegion:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise RegionFormatError(f"{path}: not JSON ({exc})") from exc
    return region_from_dict(data)


def bundled_region_names() -> list[str]:
    root = resources.files("egospread") / "data" / "regions"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def bundled_region(target: str, source: str = "flag6", bins: int = DEFAULT_BINS) -> FeasibleRegion:
    """Shipped region for ``target``.

    ``source`` is ``flag6`` (host order 6, full scale) or ``flag5`` (desk
    scale).  Cliques and empty graphs use the Kruskal-Katona upper curve with
    the shipped flag minimisation as the lower curve.
    """
    name = catalog.get(target).name
    safe = name.replace(",", "_").replace("+", "p")
    path = resources.files("egospread") / "data" / "regions" / f"{safe}__{source}__N{bins}.json"
    if not path.is_file():
        raise FileNotFoundError(f"no bundled region for {name} ({source}, N={bins})")
    return region_from_dict(json.loads(path.read_text()))


def bundled_filename(target: str, source: str, bins: int) -> str:
    name = catalog.get(target).name
    return f"{name.replace(',', '_').replace('+', 'p')}__{source}__N{bins}.json"
