"""Subgraph densities in ego networks: censuses, feasible regions and spread ratios."""

from .catalog import classify
from .census import PointCloud, census, ego_censuses
from .errors import EgoSpreadError
from .graph import Graph, ego_network, load_edge_list
from .region import FeasibleRegion, bundled_region, kruskal_katona_region, load_region, save_region
from .spread import PruneParams, SpreadResult, prune, spread_ratio

__version__ = "0.1.0"

__all__ = [
    "EgoSpreadError",
    "FeasibleRegion",
    "Graph",
    "PointCloud",
    "PruneParams",
    "SpreadResult",
    "bundled_region",
    "census",
    "classify",
    "ego_censuses",
    "ego_network",
    "kruskal_katona_region",
    "load_edge_list",
    "load_region",
    "prune",
    "save_region",
    "spread_ratio",
]
