"""Named graph families for experiment configs."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from kout import graph as G
from kout.errors import BadParameters

FAMILIES = (
    "leafy_tree", "two_cliques", "clique_plus_small", "circulant", "gnp",
    "random_regular", "almost_regular", "complete", "star", "path", "cycle",
)


@dataclass(frozen=True)
class FamilyInstance:
    graph: G.Graph
    planted_cut: tuple = ()


@lru_cache(maxsize=64)
def build(family: str, n: int, k: int | None = None, d: int | None = None,
          r: int | None = None, p: float | None = None, seed: int = 0,
          shape: str = "path") -> FamilyInstance:
    """Instantiate a family. ``k`` is the family's own construction parameter
    (leafy tree, two cliques, clique plus small cliques)."""
    if family == "leafy_tree":
        _need(k, "k", family)
        g = G.gen_leafy_tree(n, k, shape, seed)
        return FamilyInstance(g, tuple(G.leafy_tree_internal_edges(n, k, shape, seed)))
    if family == "two_cliques":
        _need(k, "k", family)
        return FamilyInstance(G.gen_two_cliques_matching(n, k), tuple(G.matching_edges(n, k)))
    if family == "clique_plus_small":
        _need(k, "k", family)
        return FamilyInstance(G.gen_clique_plus_small_cliques(n, k))
    if family == "circulant":
        _need(d, "d", family)
        return FamilyInstance(G.gen_circulant(n, d))
    if family == "gnp":
        _need(p, "p", family)
        return FamilyInstance(G.gen_gnp(n, p, seed))
    if family == "random_regular":
        _need(r, "r", family)
        return FamilyInstance(G.gen_networkx_regular(n, r, seed))
    if family == "almost_regular":
        _need(r, "r", family)
        return FamilyInstance(G.gen_almost_regular(n, r, seed))
    if family == "complete":
        return FamilyInstance(G.complete_graph(n))
    if family == "star":
        return FamilyInstance(G.star_graph(n - 1))
    if family == "path":
        return FamilyInstance(G.path_graph(n))
    if family == "cycle":
        return FamilyInstance(G.cycle_graph(n))
    raise BadParameters(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


def _need(value, name: str, family: str) -> None:
    if value is None:
        raise BadParameters(f"family {family!r} needs parameter {name!r}")
