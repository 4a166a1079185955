from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egospread import catalog
from egospread.census import (
    ALL_NAMES,
    PointCloud,
    brute_force_census,
    census,
    containment_matrix,
    ego_censuses,
    induced_from_noninduced,
    noninduced_counts,
    x_axis_coverage,
)
from egospread.errors import EmptyCloudError, OracleTooLargeError
from egospread.graph import Graph, complete_graph, cycle_graph, ego_network, empty_graph

from conftest import random_graph


def agrees_with_oracle(g):
    c = census(g)
    for k, counts in ((3, c.order3_counts), (4, c.order4_counts)):
        assert counts == brute_force_census(g, k)
    c.check()


def test_example_ego_counts(example_graph):
    c = census(ego_network(example_graph, 1))
    assert c.order3_counts == {"K3bar": 1, "P3bar": 2, "P3": 1, "K3": 0}
    assert c.count("P3+v") == 1
    assert sum(c.order4_counts.values()) == 1


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 12), st.floats(0.05, 0.95), st.integers(0, 10**6))
def test_census_equals_oracle(n, p, seed):
    agrees_with_oracle(random_graph(n, p, seed))


@pytest.mark.parametrize("name", ALL_NAMES)
def test_catalog_graphs_count_themselves(name):
    g = catalog.get(name).graph
    c = census(g)
    assert c.count(name) == 1
    agrees_with_oracle(g)


@pytest.mark.parametrize("n", [0, 1, 2, 3, 7, 13])
def test_complete_empty_cycle(n):
    assert census(complete_graph(n)).count("K4") == comb(n, 4)
    assert census(empty_graph(n)).count("K4bar") == comb(n, 4)
    if n >= 3:
        agrees_with_oracle(cycle_graph(n))


def test_denser_graphs_against_oracle():
    # larger orders exercise the 4-clique path with non-trivial degree ordering
    for seed, (n, p) in enumerate([(25, 0.5), (30, 0.8), (40, 0.2), (22, 0.95)]):
        agrees_with_oracle(random_graph(n, p, seed))


def test_containment_inverse_is_exact():
    for k in (3, 4):
        A = containment_matrix(k).astype(object)
        B = induced_from_noninduced(k)
        assert (A.dot(B) == np.identity(A.shape[0], dtype=int)).all()
        # the empty pattern is contained in everything exactly once
        assert list(containment_matrix(k)[0]) == [1] * A.shape[0]


def test_noninduced_counts_small_cases():
    nc3, nc4 = noninduced_counts(complete_graph(5))
    assert nc3 == [comb(5, 3), comb(5, 3) * 3, comb(5, 3) * 3, comb(5, 3)]
    assert nc4[-1] == comb(5, 4)


def test_oracle_limit():
    with pytest.raises(OracleTooLargeError):
        brute_force_census(empty_graph(200), 4, limit=1000)


def test_example_coordinate_is_exact(example_graph):
    cloud = ego_censuses(example_graph, min_degree=1).cloud("P3")
    row = list(cloud.vertices).index(1)
    assert cloud.exact[row] == (Fraction(1, 3), Fraction(1, 4))
    assert cloud.x[row] == 1 / 3 and cloud.y[row] == 0.25


def test_vertex_six_edge_density_zero(example_graph):
    table = ego_censuses(example_graph, min_degree=1)
    i = table.vertices.index(6)
    assert table.censuses[i].edge_density() == 0


def test_low_degree_vertices_left_out(example_graph):
    table = ego_censuses(example_graph, min_degree=1)
    assert len(table.vertices) == 7
    # degree-2 egos have no triple, degree-3 egos have no 4-set
    assert len(table.cloud("P3")) == 4
    assert len(table.cloud("C4")) == 1
    with pytest.raises(EmptyCloudError):
        ego_censuses(example_graph, min_degree=5)


def test_workers_do_not_change_results():
    g = random_graph(120, 0.15, 7)
    one = ego_censuses(g, min_degree=10)
    two = ego_censuses(g, min_degree=10, workers=2, chunk=16)
    assert one.vertices == two.vertices
    assert [c.counts() for c in one.censuses] == [c.counts() for c in two.censuses]


def test_csv_round_trip(tmp_path, example_graph):
    cloud = ego_censuses(example_graph, min_degree=1).cloud("P3bar")
    path = tmp_path / "c.csv"
    cloud.to_csv(path, comment="stamp")
    text = path.read_text().splitlines()
    assert text[0] == "# stamp" and text[1] == "vertex,degree,x,y"
    back = PointCloud.from_csv(path, "P3bar")
    assert np.array_equal(back.x, cloud.x) and np.array_equal(back.y, cloud.y)
    assert list(back.vertices) == list(cloud.vertices)


def test_x_axis_coverage():
    mk = lambda xs: PointCloud("P3", np.arange(len(xs)), np.full(len(xs), 10), np.array(xs), np.zeros(len(xs)))
    assert x_axis_coverage(mk([0.01, 0.5, 0.99]))
    assert not x_axis_coverage(mk([0.2, 0.99]))
    assert not x_axis_coverage(mk([0.0, 0.9]))
    with pytest.raises(EmptyCloudError):
        x_axis_coverage(mk([]))


def test_densities_sum_to_one():
    g = random_graph(15, 0.4, 3)
    c = census(g)
    assert sum(c.density(n) for n in catalog.names(3)) == 1
    assert sum(c.density(n) for n in catalog.names(4)) == 1
    assert c.edge_density() == Fraction(g.edge_count, comb(15, 2))
