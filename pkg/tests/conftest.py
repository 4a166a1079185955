import random
from itertools import combinations

import pytest

from egospread.graph import Graph, load_edge_list

EXAMPLE_EDGES = "0 1\n1 2\n1 3\n2 3\n2 4\n3 5\n4 6\n5 6\n1 4\n"


@pytest.fixture
def example_graph() -> Graph:
    return load_edge_list(EXAMPLE_EDGES)


def random_graph(n, p, seed):
    rng = random.Random(seed)
    return Graph.from_edges(n, [e for e in combinations(range(n), 2) if rng.random() < p])


def community_edges(sizes=(30, 30, 30, 30, 30), probs=(0.15, 0.35, 0.55, 0.75, 0.95), cross=0.01, seed=0):
    """Edge list text of a planted-community graph whose ego densities spread across [0, 1]."""
    rng = random.Random(seed)
    block = []
    for b, s in enumerate(sizes):
        block += [b] * s
    lines = []
    n = len(block)
    for u in range(n):
        for v in range(u + 1, n):
            p = probs[block[u]] if block[u] == block[v] else cross
            if rng.random() < p:
                lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"
