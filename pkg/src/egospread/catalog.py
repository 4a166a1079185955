"""Named catalogue of the 15 graphs on three and four vertices."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .canon import CanonicalCode, canonical_code
from .errors import WrongTargetError
from .graph import Graph

# row-major figure layout: 4 three-vertex graphs then 11 four-vertex graphs
_DEFINITIONS = [
    ("K3bar", "K̄3", 3, []),
    ("P3bar", "P̄3", 3, [(0, 1)]),
    ("P3", "P3", 3, [(0, 1), (1, 2)]),
    ("K3", "K3", 3, [(0, 1), (1, 2), (0, 2)]),
    ("K4bar", "K̄4", 4, []),
    ("e+v+v", "e+v+v", 4, [(0, 1)]),
    ("e+e", "e+e", 4, [(0, 1), (2, 3)]),
    ("P3+v", "P3+v", 4, [(0, 1), (1, 2)]),
    ("K3+v", "K3+v", 4, [(0, 1), (1, 2), (0, 2)]),
    ("K1,3", "K1,3", 4, [(0, 1), (0, 2), (0, 3)]),
    ("P4", "P4", 4, [(0, 1), (1, 2), (2, 3)]),
    ("K3+pendant", "K3+pendant", 4, [(0, 1), (1, 2), (0, 2), (2, 3)]),
    ("C4", "C4", 4, [(0, 1), (1, 2), (2, 3), (3, 0)]),
    ("K4-e", "K4−e", 4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]),
    ("K4", "K4", 4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)]),
]

_ALIASES = {
    "K̄3": "K3bar", "P̄3": "P3bar", "K̄4": "K4bar", "K4−e": "K4-e",
    "co-K3": "K3bar", "co-P3": "P3bar", "co-K4": "K4bar", "K13": "K1,3", "claw": "K1,3",
    "K3+p": "K3+pendant", "paw": "K3+pendant", "diamond": "K4-e",
    # file-name forms
    "K1_3": "K1,3", "K3ppendant": "K3+pendant", "K3pv": "K3+v", "P3pv": "P3+v", "epe": "e+e", "epvpv": "e+v+v",
}

COMPLETE = {"K3", "K4"}
EMPTY = {"K3bar", "K4bar"}


@dataclass(frozen=True)
class SmallGraphClass:
    name: str
    label: str
    order: int
    edges: tuple[tuple[int, int], ...]
    canonical_code: CanonicalCode
    complement_name: str

    @property
    def graph(self) -> Graph:
        return Graph.from_edges(self.order, self.edges)

    @property
    def is_complete(self) -> bool:
        return self.name in COMPLETE

    @property
    def is_empty(self) -> bool:
        return self.name in EMPTY


@lru_cache(maxsize=None)
def _build() -> tuple[SmallGraphClass, ...]:
    codes = {}
    for name, _, order, edges in _DEFINITIONS:
        codes[name] = canonical_code(Graph.from_edges(order, edges))
    by_code = {c: n for n, c in codes.items()}
    out = []
    for name, label, order, edges in _DEFINITIONS:
        comp = canonical_code(Graph.from_edges(order, edges).complement())
        out.append(SmallGraphClass(name, label, order, tuple(edges), codes[name], by_code[comp]))
    return tuple(out)


def catalog() -> list[SmallGraphClass]:
    """The 15 classes in figure order."""
    return list(_build())


def names(order: int | None = None) -> list[str]:
    return [c.name for c in _build() if order is None or c.order == order]


def get(name: str | SmallGraphClass) -> SmallGraphClass:
    if isinstance(name, SmallGraphClass):
        return name
    key = _ALIASES.get(name, name)
    for c in _build():
        if c.name == key:
            return c
    raise WrongTargetError(f"unknown small graph {name!r}; expected one of {names()}")


def complement(name: str) -> str:
    return get(name).complement_name


def classify(g: Graph) -> str:
    """Catalogue name of a 3- or 4-vertex graph."""
    code = canonical_code(g)
    for c in _build():
        if c.canonical_code == code:
            return c.name
    raise WrongTargetError(f"graph of order {g.vertex_count} is not in the catalogue")
