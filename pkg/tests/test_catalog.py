import pytest

from egospread import catalog
from egospread.canon import canonical_code, enumerate_graph_classes
from egospread.errors import WrongTargetError
from egospread.graph import Graph

ORDER = ["K3bar", "P3bar", "P3", "K3", "K4bar", "e+v+v", "e+e", "P3+v", "K3+v",
         "K1,3", "P4", "K3+pendant", "C4", "K4-e", "K4"]


def test_names_in_display_order():
    assert catalog.names() == ORDER
    assert catalog.names(3) == ORDER[:4]
    assert len(catalog.names(4)) == 11


def test_catalog_covers_every_class():
    for k in (3, 4):
        codes = {c.canonical_code for c in catalog.catalog() if c.order == k}
        assert codes == set(enumerate_graph_classes(k))


@pytest.mark.parametrize("name", ORDER)
def test_classify_own_graph(name):
    cls = catalog.get(name)
    assert catalog.classify(cls.graph) == name
    assert cls.graph.edge_count == len(cls.edges)


@pytest.mark.parametrize("name", ORDER)
def test_complement_names(name):
    cls = catalog.get(name)
    comp = cls.graph.complement()
    assert catalog.classify(comp) == catalog.complement(name)
    assert catalog.complement(catalog.complement(name)) == name


def test_aliases_and_unknown():
    assert catalog.get("claw").name == "K1,3"
    assert catalog.get("K1_3").name == "K1,3"
    assert catalog.get("diamond").name == "K4-e"
    with pytest.raises(WrongTargetError):
        catalog.get("K5")
    with pytest.raises(WrongTargetError):
        catalog.classify(Graph.from_edges(5, []))


def test_complete_and_empty_flags():
    flagged = {c.name for c in catalog.catalog() if c.is_complete or c.is_empty}
    assert flagged == {"K3", "K3bar", "K4", "K4bar"}
    assert canonical_code(catalog.get("C4").graph) == catalog.get("C4").canonical_code
