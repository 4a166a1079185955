import itertools
import json
import random
from fractions import Fraction

import numpy as np
import pytest

from egospread import catalog
from egospread.errors import RegionFormatError, WrongTargetError
from egospread.region import (
    FeasibleRegion,
    bin_index,
    brute_force_region,
    bundled_region,
    combine,
    kruskal_katona_region,
    load_region,
    region_area,
    region_from_dict,
    save_region,
    snap_subdomain,
)

NAMES = catalog.names()


def step_graphon_point(weights, W, target):
    """Exact (edge density, induced target density) of a 0/1 step graphon.

    Independent of the census code: the induced pattern of every vertex map
    is classified by brute-force isomorphism against the target's edge set.
    """
    cls = catalog.get(target)
    k = cls.order
    m = len(weights)
    edge = sum(weights[a] * weights[b] * W[a][b] for a in range(m) for b in range(m))
    target_sets = set()
    for perm in itertools.permutations(range(k)):
        target_sets.add(frozenset(frozenset((perm[u], perm[v])) for u, v in cls.edges))
    dens = Fraction(0)
    for phi in itertools.product(range(m), repeat=k):
        es = frozenset(frozenset((i, j)) for i, j in itertools.combinations(range(k), 2) if W[phi[i]][phi[j]])
        if es in target_sets:
            w = Fraction(1)
            for a in phi:
                w *= weights[a]
            dens += w
    return edge, dens


def random_graphons(count, seed):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        m = rng.randint(1, 4)
        raw = [rng.randint(1, 6) for _ in range(m)]
        weights = [Fraction(r, sum(raw)) for r in raw]
        W = [[0] * m for _ in range(m)]
        for a in range(m):
            for b in range(a, m):
                W[a][b] = W[b][a] = rng.randint(0, 1)
        out.append((weights, W))
    # two balanced cliques: the extremal construction for one-edge triples
    out.append(([Fraction(1, 2)] * 2, [[1, 0], [0, 1]]))
    return out


@pytest.mark.parametrize("target", ["K3", "K4", "K3bar", "K4bar"])
def test_kruskal_katona_closed_forms(target):
    r = kruskal_katona_region(target)
    n = catalog.get(target).order
    for i in range(100):
        expect = ((i + 1) / 100) ** (n / 2) if target.startswith("K") and "bar" not in target else (1 - i / 100) ** (n / 2)
        assert abs(r.upper[i] - expect) <= 1e-12
    assert r.lower_placeholder and not r.lower.any()


def test_k4_bin_49():
    assert kruskal_katona_region("K4").upper[49] == 0.25


def test_kruskal_katona_wrong_target():
    with pytest.raises(WrongTargetError):
        kruskal_katona_region("P4")


def test_bin_index_edges():
    for N in (1, 7, 100):
        assert [bin_index(i / N, N) for i in range(N)] == list(range(N))
        assert bin_index(1.0, N) == N - 1
    assert list(bin_index(np.array([0.0, 0.499999, 0.5, 1.0]), 100)) == [0, 49, 50, 99]


def test_validation_errors():
    with pytest.raises(RegionFormatError):
        FeasibleRegion("K3", 3, [0.5, 0.5, 0.5], [0.6, 0, 0], "x")
    with pytest.raises(RegionFormatError):
        FeasibleRegion("P4", 2, [0.5, 0.5], [0.1, 0], "x")
    with pytest.raises(RegionFormatError):
        FeasibleRegion("P4", 3, [0.5, 0.5], [0, 0], "x")
    with pytest.raises(RegionFormatError):
        FeasibleRegion("P4", 2, [1.5, 0.5], [0, 0], "x")


def test_save_load_round_trip(tmp_path):
    r = bundled_region("P4", "flag5")
    path = tmp_path / "p4.json"
    save_region(r, path)
    again = load_region(path)
    assert again.same_as(r)
    save_region(again, tmp_path / "p4b.json")
    assert (tmp_path / "p4b.json").read_bytes() == path.read_bytes()


def test_format_errors(tmp_path):
    d = kruskal_katona_region("K3").to_dict()
    with pytest.raises(RegionFormatError):
        region_from_dict(dict(d, version=2))
    with pytest.raises(RegionFormatError):
        region_from_dict(dict(d, bins=99))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(RegionFormatError):
        load_region(bad)


def test_area_and_subdomain():
    r = FeasibleRegion("P4", 4, [1, 1, 0.5, 0.5], [0, 0, 0, 0], "x")
    assert region_area(r) == pytest.approx(0.75)
    assert snap_subdomain(0.3, 0.6, 4) == (1, 3)
    assert region_area(r, (0.25, 0.75)) == pytest.approx(0.375)
    with pytest.raises(ValueError):
        snap_subdomain(0.5, 0.5, 4)


def test_contains_is_vectorised():
    r = FeasibleRegion("K3", 2, [0.5, 1.0], [0.1, 0.2], "x")
    got = r.contains([0.1, 0.1, 0.7, 1.0, 0.7], [0.05, 0.3, 0.9, 0.2, 0.1])
    assert list(got) == [False, True, True, True, False]


def test_brute_force_finite_maximum():
    # finite hosts peak at K3 + K4 (e = 3/7) with density 6/7
    r = brute_force_region("P3bar", 100, 7)
    assert r.peak_bin() == 42
    assert r.upper[42] == pytest.approx(6 / 7)
    assert not r.asymptotic and r.provenance == "brute-force(7)"


def test_brute_force_lower_curve_for_empty_triples():
    r = brute_force_region("K3bar", 20, 7, minimize=True)
    assert (r.lower <= r.upper).all()
    # bin 0 also holds the one-edge graph, which destroys 5 of the 35 triples
    assert r.lower[0] == pytest.approx(30 / 35) and r.lower[-1] == 0.0


@pytest.mark.parametrize("source", ["flag5", "flag6"])
@pytest.mark.parametrize("target", NAMES)
def test_bundled_regions_load(source, target):
    r = bundled_region(target, source)
    assert r.bins == 100 and r.target == target
    assert r.meta.get("unverified_bins", []) == [] or "upper" in r.meta
    cls = catalog.get(target)
    if cls.is_complete or cls.is_empty:
        assert r.provenance.startswith("kruskal-katona")
        assert np.allclose(r.upper, kruskal_katona_region(target).upper)
    else:
        assert not r.lower.any()


@pytest.mark.parametrize("target", NAMES)
def test_bundled_regions_contain_graphon_points(target):
    # every limit object is asymptotically realisable, so it must sit inside the region
    for source in ("flag5", "flag6"):
        r = bundled_region(target, source)
        for weights, W in random_graphons(25, hash(target) % 1000):
            e, d = step_graphon_point(weights, W, target)
            i = bin_index(float(e), 100)
            assert float(d) <= r.upper[i] + 1e-7, (source, weights, W)
            assert float(d) >= r.lower[i] - 1e-7, (source, weights, W)


@pytest.mark.parametrize("target", NAMES)
def test_bundled_regions_contain_random_graph_curve(target):
    cls = catalog.get(target)
    k = cls.order
    copies = len({frozenset(frozenset((p[u], p[v])) for u, v in cls.edges)
                  for p in itertools.permutations(range(k))})
    r = bundled_region(target, "flag6")
    for p in np.linspace(0, 1, 101):
        d = copies * p ** len(cls.edges) * (1 - p) ** (k * (k - 1) // 2 - len(cls.edges))
        i = bin_index(p, 100)
        assert r.lower[i] - 1e-7 <= d <= r.upper[i] + 1e-7


@pytest.mark.parametrize("target", NAMES)
def test_higher_host_order_refines(target):
    a, b = bundled_region(target, "flag5"), bundled_region(target, "flag6")
    assert (b.upper <= a.upper + 1e-5).all()
    assert (b.lower >= a.lower - 1e-5).all()


def test_flag_peak_for_one_edge_triples():
    r = bundled_region("P3bar", "flag6")
    i = r.peak_bin()
    assert i / 100 <= 0.5 <= (i + 1) / 100
    assert 0.75 <= r.upper.max() <= 0.78
    # bins whose closed interval holds e = 1/2 cannot go below the construction
    assert r.upper[49] >= 0.75 and r.upper[50] >= 0.75


def test_empty_triple_lower_curve_positive_below_half():
    r = bundled_region("K3bar", "flag6")
    assert (r.lower[:49] > 0).all()
    assert r.lower[50:].max() <= 1e-6


def test_combine_requires_matching():
    with pytest.raises(RegionFormatError):
        combine(kruskal_katona_region("K3"), kruskal_katona_region("K4"))
    c = combine(kruskal_katona_region("K3", 10), brute_force_region("K3", 10, 6, minimize=True))
    assert (c.lower <= c.upper).all()
