"""Plain flag algebra relaxation of a binned graph program.

For host order ``n`` the program is written over the isomorphism classes
``G`` on ``n`` vertices.  For every type ``sigma`` of order ``t`` (``t`` of
the same parity as ``n``, ``t <= n - 2``) the flags have order
``(n + t) / 2`` and ``M_sigma(G)[i, j]`` is the probability that a random
injective labelling ``theta`` of ``t`` host vertices, together with a random
split of the remaining vertices into two halves, produces flags ``F_i`` and
``F_j``.  A certificate is valid for a maximisation when for every ``G``::

    lam - p(H; G) - c1 (p(K2; G) - i/N) - c2 ((i+1)/N - p(K2; G))
        - sum_sigma <Q_sigma, M_sigma(G)>  >=  0

and every ``Q_sigma`` is positive semidefinite.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from math import comb, factorial

import numpy as np

from .. import catalog
from ..canon import CanonicalCode, enumerate_graph_classes, graph_from_code, rows_to_bits
from ..census import census

MAX_HOST_ORDER = 7


@dataclass(frozen=True)
class GraphProgram:
    """``sense`` of ``objective`` subject to ``i/N <= p(K2) <= (i+1)/N``.

    ``objective`` is a catalogue name or a mapping of names to coefficients;
    ``bin`` is ``(i, N)`` or ``None`` for the unconstrained program.
    """

    objective: object
    sense: str = "max"
    bin: tuple[int, int] | None = None
    host_order: int = 5

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        terms = self.terms()
        order = max(catalog.get(name).order for name in terms)
        if not order <= self.host_order <= MAX_HOST_ORDER:
            raise ValueError(f"host order must lie in [{order}, {MAX_HOST_ORDER}], got {self.host_order}")
        if self.bin is not None:
            i, N = self.bin
            if not 0 <= i < N:
                raise ValueError(f"bin {i} outside 0..{N - 1}")

    def terms(self) -> dict[str, Fraction]:
        if isinstance(self.objective, str):
            return {catalog.get(self.objective).name: Fraction(1)}
        return {catalog.get(k).name: Fraction(v) for k, v in dict(self.objective).items()}

    def describe(self) -> str:
        obj = " + ".join(f"{c}*{n}" if c != 1 else n for n, c in self.terms().items())
        where = "unconstrained" if self.bin is None else f"bin {self.bin[0]}/{self.bin[1]}"
        return f"{self.sense} {obj} ({where}, host order {self.host_order})"


@dataclass
class TypeBlock:
    """One PSD block: a type, its flags and the integer pair-count matrices."""

    type_code: CanonicalCode
    flag_keys: list[int]
    denominator: int
    counts: np.ndarray  # (hosts, k, k) int64; M_sigma(G) = counts[G] / denominator

    @property
    def size(self) -> int:
        return len(self.flag_keys)

    def matrix(self, g: int) -> np.ndarray:
        return self.counts[g] / self.denominator


@dataclass
class SDPProblem:
    program: GraphProgram
    hosts: list[CanonicalCode]
    objective: list[Fraction]
    edge: list[Fraction]
    blocks: list[TypeBlock]
    meta: dict = field(default_factory=dict)

    @property
    def n_hosts(self) -> int:
        return len(self.hosts)

    @property
    def has_bin(self) -> bool:
        return self.program.bin is not None

    def bin_rows(self) -> tuple[list[Fraction], list[Fraction]]:
        """Per-host values of ``p(K2) - i/N`` and ``(i+1)/N - p(K2)``."""
        if self.program.bin is None:
            return [], []
        i, N = self.program.bin
        lo, hi = Fraction(i, N), Fraction(i + 1, N)
        return [e - lo for e in self.edge], [hi - e for e in self.edge]

    def slack_layout(self) -> list[str]:
        """Entry names of the diagonal block, in order."""
        names = [f"host{g}" for g in range(self.n_hosts)]
        if self.has_bin:
            names += ["bin_low", "bin_high"]
        return names + ["norm_plus", "norm_minus"]

    def content_hash(self) -> str:
        h = hashlib.sha256()
        p = self.program
        h.update(repr((sorted((k, str(v)) for k, v in p.terms().items()), p.sense, p.bin, p.host_order)).encode())
        h.update(repr([(c.order, c.bits) for c in self.hosts]).encode())
        h.update(repr([str(x) for x in self.objective]).encode())
        h.update(repr([str(x) for x in self.edge]).encode())
        for b in self.blocks:
            h.update(repr((b.type_code, b.flag_keys, b.denominator)).encode())
            h.update(np.ascontiguousarray(b.counts, dtype="<i8").tobytes())
        return h.hexdigest()


def flag_key(rows: list[int], labelled: tuple[int, ...], free: tuple[int, ...]) -> int:
    """Label-preserving canonical bits: minimum over orderings of the free vertices."""
    if len(free) <= 1:
        return rows_to_bits(rows, list(labelled) + list(free))
    return min(rows_to_bits(rows, list(labelled) + list(p)) for p in permutations(free))


def type_orders(n: int) -> list[int]:
    return list(range(n % 2, n - 1, 2))


@lru_cache(maxsize=None)
def types_and_flags(n: int) -> tuple[tuple[CanonicalCode, tuple[int, ...]], ...]:
    """Types (one per isomorphism class) with their sorted flag keys for host order ``n``."""
    out = []
    for t in type_orders(n):
        m = (n + t) // 2
        type_codes = [CanonicalCode(0, 0)] if t == 0 else enumerate_graph_classes(t)
        free_pairs = [(i, j) for i, j in combinations(range(m), 2) if j >= t]
        for code in type_codes:
            base = graph_from_code(code).bitmasks() if t else []
            keys = set()
            for mask in range(1 << len(free_pairs)):
                rows = list(base) + [0] * (m - t)
                for b, (i, j) in enumerate(free_pairs):
                    if mask >> b & 1:
                        rows[i] |= 1 << j
                        rows[j] |= 1 << i
                keys.add(flag_key(rows, tuple(range(t)), tuple(range(t, m))))
            out.append((code, tuple(sorted(keys))))
    return tuple(out)


def _labelled_bits(rows: list[int], theta: tuple[int, ...]) -> int:
    return rows_to_bits(rows, list(theta))


@lru_cache(maxsize=None)
def flag_data(n: int) -> tuple[tuple[CanonicalCode, ...], tuple[TypeBlock, ...]]:
    """Hosts and type blocks for host order ``n``; independent of objective and bin."""
    hosts = tuple(enumerate_graph_classes(n))
    host_rows = [graph_from_code(c).bitmasks() for c in hosts]
    blocks = []
    for code, keys in types_and_flags(n):
        t = code.order
        m = (n + t) // 2
        type_bits = code.bits
        index = {k: i for i, k in enumerate(keys)}
        k = len(keys)
        counts = np.zeros((len(hosts), k, k), dtype=np.int64)
        denominator = factorial(n) // factorial(n - t) * comb(n - t, m - t)
        for g, rows in enumerate(host_rows):
            for theta in permutations(range(n), t):
                if t and _labelled_bits(rows, theta) != type_bits:
                    continue
                rest = tuple(v for v in range(n) if v not in theta)
                for s1 in combinations(rest, m - t):
                    s2 = tuple(v for v in rest if v not in s1)
                    i1 = index[flag_key(rows, theta, s1)]
                    i2 = index[flag_key(rows, theta, s2)]
                    counts[g, i1, i2] += 1
        assert np.array_equal(counts, counts.transpose(0, 2, 1)), "pair-count matrices must be symmetric"
        blocks.append(TypeBlock(code, list(keys), denominator, counts))
    return hosts, tuple(blocks)


@lru_cache(maxsize=None)
def host_vectors(n: int) -> tuple[tuple[Fraction, ...], dict[str, tuple[Fraction, ...]]]:
    """Edge density and every catalogue density for each host class on ``n`` vertices."""
    hosts, _ = flag_data(n)
    edges, dens = [], {name: [] for name in catalog.names()}
    for code in hosts:
        c = census(graph_from_code(code))
        edges.append(c.edge_density())
        for name in dens:
            dens[name].append(c.density(name))
    return tuple(edges), {k: tuple(v) for k, v in dens.items()}


def assemble(prog: GraphProgram) -> SDPProblem:
    """Exact SDP data for ``prog``."""
    n = prog.host_order
    hosts, blocks = flag_data(n)
    edge, dens = host_vectors(n)
    objective = [Fraction(0)] * len(hosts)
    for name, coef in prog.terms().items():
        objective = [o + coef * d for o, d in zip(objective, dens[name])]
    assert len(blocks) == sum(
        1 if t == 0 else len(enumerate_graph_classes(t)) for t in type_orders(n)
    ), "one block per type"
    return SDPProblem(prog, list(hosts), objective, list(edge), list(blocks))
