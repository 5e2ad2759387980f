"""Components, spanning forests and inter-component edge counts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from kout.errors import TooLargeForBruteForce, VertexOutOfRange
from kout.graph import Edge, Graph, canonical

BRUTE_FORCE_MAX_N = 12


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.count = n

    def find(self, x: int) -> int:
        root = x
        parent = self.parent
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True

    def same(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)


@dataclass(frozen=True, eq=False)
class Partition:
    """Component labels, dense in ``[0, component_count)`` and numbered by
    first appearance in vertex order."""

    component_id: np.ndarray
    component_count: int
    component_sizes: np.ndarray

    @property
    def n(self) -> int:
        return len(self.component_id)

    def members(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.component_count)]
        for v, c in enumerate(self.component_id.tolist()):
            out[c].append(v)
        return out

    def same_as(self, other: "Partition") -> bool:
        return np.array_equal(self.component_id, other.component_id)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.same_as(other)


@dataclass(frozen=True)
class Forest:
    edges: frozenset

    def __len__(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)


def _relabel(roots: Iterable[int]) -> Partition:
    ids: dict[int, int] = {}
    labels = [ids.setdefault(r, len(ids)) for r in roots]
    lab = np.array(labels, dtype=np.int64)
    sizes = np.bincount(lab, minlength=len(ids)) if len(lab) else np.zeros(0, dtype=np.int64)
    return Partition(lab, len(ids), sizes)


def _check_range(n: int, edges) -> None:
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise VertexOutOfRange(f"edge {(u, v)} outside [0, {n})")


def components(n: int, edges: Iterable[Edge]) -> Partition:
    edges = list(edges)
    _check_range(n, edges)
    uf = UnionFind(n)
    for u, v in edges:
        uf.union(u, v)
    return _relabel(uf.find(v) for v in range(n))


def partition_from_labels(labels: np.ndarray) -> Partition:
    """Renumber arbitrary labels into a Partition (first-appearance order)."""
    return _relabel(np.asarray(labels).tolist())


def components_array(n: int, edge_array: np.ndarray) -> np.ndarray:
    """Component labels via scipy's graph traversal (fast path for trials)."""
    edge_array = np.asarray(edge_array, dtype=np.int64).reshape(-1, 2)
    a = coo_matrix(
        (np.ones(len(edge_array), dtype=np.int8), (edge_array[:, 0], edge_array[:, 1])),
        shape=(n, n),
    )
    return connected_components(a, directed=False)[1]


def spanning_forest(n: int, edges: Iterable[Edge]) -> Forest:
    """Kruskal-style forest, scanning edges in sorted canonical order."""
    edges = sorted({canonical(u, v) for u, v in edges})
    _check_range(n, edges)
    uf = UnionFind(n)
    return Forest(frozenset(e for e in edges if uf.union(*e)))


def inter_component_edges(g: Graph, part: Partition) -> tuple[int, list[Edge]]:
    lab = np.asarray(part.component_id)
    ea = g.edge_array
    cross = lab[ea[:, 0]] != lab[ea[:, 1]]
    out = [(int(u), int(v)) for u, v in ea[cross]]
    return len(out), out


def inter_component_count(g: Graph, mask: np.ndarray) -> int:
    """Inter-component edges of g w.r.t. the subgraph given by an edge mask."""
    lab = components_array(g.n, g.edge_array[mask])
    ea = g.edge_array
    return int(np.count_nonzero(lab[ea[:, 0]] != lab[ea[:, 1]]))


def batch_component_labels(g: Graph, masks: np.ndarray) -> np.ndarray:
    """Component labels for many sampled subgraphs at once, shape ``(T, n)``.

    The T subgraphs are laid side by side as one disjoint union so a single
    traversal labels all of them.
    """
    masks = np.asarray(masks, dtype=bool)
    t_count = masks.shape[0]
    n = g.n
    rows, cols = np.nonzero(masks)
    ea = g.edge_array
    off = rows.astype(np.int64) * n
    a = coo_matrix(
        (np.ones(len(rows), dtype=np.int8), (ea[cols, 0] + off, ea[cols, 1] + off)),
        shape=(t_count * n, t_count * n),
    )
    return connected_components(a, directed=False)[1].reshape(t_count, n)


def batch_inter_component_counts(g: Graph, masks: np.ndarray) -> np.ndarray:
    masks = np.asarray(masks, dtype=bool)
    if g.m == 0:
        return np.zeros(masks.shape[0], dtype=np.int64)
    lab = batch_component_labels(g, masks)
    ea = g.edge_array
    return np.count_nonzero(lab[:, ea[:, 0]] != lab[:, ea[:, 1]], axis=1)


def batch_is_connected(g: Graph, masks: np.ndarray) -> np.ndarray:
    lab = batch_component_labels(g, masks)
    return (lab == lab[:, :1]).all(axis=1)


def is_connected(g: Graph) -> bool:
    if g.n <= 1:
        return True
    return components(g.n, g.edges).component_count == 1


def brute_force_edge_connectivity(g: Graph) -> int:
    """Minimum cut over every bipartition; only for n <= 12."""
    n = g.n
    if n > BRUTE_FORCE_MAX_N:
        raise TooLargeForBruteForce(f"n={n} > {BRUTE_FORCE_MAX_N}")
    if n <= 1:
        return 0
    ea = g.edge_array
    best = None
    # vertex n-1 stays on side 0, so each bipartition is visited once
    for bits in range(1, 1 << (n - 1)):
        side = np.array([(bits >> v) & 1 for v in range(n)])
        cut = int(np.count_nonzero(side[ea[:, 0]] != side[ea[:, 1]]))
        best = cut if best is None else min(best, cut)
    return best


def is_acyclic(n: int, edges: Iterable[Edge]) -> bool:
    uf = UnionFind(n)
    return all(uf.union(u, v) for u, v in edges)
