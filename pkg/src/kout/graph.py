"""Immutable simple undirected graphs, the graph families used in the
experiments, and the plain-text edge-list format."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from kout.errors import (
    BadParameters,
    EdgeNotInGraph,
    GenerationFailed,
    ParseError,
    SelfLoop,
    VertexOutOfRange,
)

Edge = tuple[int, int]


def canonical(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    Edges are stored once in canonical ``u < v`` form, sorted. Adjacency is kept
    in CSR form: ``nbrs[indptr[v]:indptr[v+1]]`` are v's neighbours in increasing
    order and ``slot_edge`` maps each of these directed slots to its edge id.
    All arrays are read-only.
    """

    __slots__ = (
        "n", "edge_array", "indptr", "nbrs", "slot_edge", "slot_owner", "degrees",
        "_edge_ids", "_edges",
    )

    def __init__(self, n: int, edge_array: np.ndarray):
        # edge_array must already be canonical, sorted and unique
        self.n = int(n)
        e = np.asarray(edge_array, dtype=np.int64).reshape(-1, 2)
        self.edge_array = _readonly(e)
        m = len(e)
        owner = np.concatenate([e[:, 0], e[:, 1]])
        other = np.concatenate([e[:, 1], e[:, 0]])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((other, owner))
        self.slot_owner = _readonly(owner[order])
        self.nbrs = _readonly(other[order])
        self.slot_edge = _readonly(eid[order])
        deg = np.bincount(owner, minlength=self.n).astype(np.int64)
        self.degrees = _readonly(deg)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        self.indptr = _readonly(indptr)
        self._edge_ids = None
        self._edges = None

    @property
    def m(self) -> int:
        return len(self.edge_array)

    @property
    def edges(self) -> tuple[Edge, ...]:
        if self._edges is None:
            self._edges = tuple((int(u), int(v)) for u, v in self.edge_array)
        return self._edges

    def neighbors(self, v: int) -> np.ndarray:
        return self.nbrs[self.indptr[v]:self.indptr[v + 1]]

    def incident_edge_ids(self, v: int) -> np.ndarray:
        return self.slot_edge[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    def edge_id(self, u: int, v: int) -> int:
        if self._edge_ids is None:
            self._edge_ids = {e: i for i, e in enumerate(self.edges)}
        try:
            return self._edge_ids[canonical(u, v)]
        except KeyError:
            raise EdgeNotInGraph((u, v)) from None

    def has_edge(self, u: int, v: int) -> bool:
        if u == v or not (0 <= u < self.n and 0 <= v < self.n):
            return False
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edge_array, other.edge_array)

    def __hash__(self):
        return hash((self.n, self.edge_array.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def _from_array(n: int, arr: np.ndarray) -> Graph:
    arr = np.asarray(arr, dtype=np.int64).reshape(-1, 2)
    if len(arr):
        if arr.min() < 0 or arr.max() >= n:
            bad = arr[(arr < 0).any(axis=1) | (arr >= n).any(axis=1)][0]
            raise VertexOutOfRange(f"edge {tuple(int(x) for x in bad)} outside [0, {n})")
        if (arr[:, 0] == arr[:, 1]).any():
            v = int(arr[arr[:, 0] == arr[:, 1]][0, 0])
            raise SelfLoop(f"self-loop at vertex {v}")
        arr = np.sort(arr, axis=1)
        arr = np.unique(arr, axis=0)
    return Graph(n, arr)


def new_graph(n: int, edge_list: Iterable[Sequence[int]]) -> Graph:
    """Build a graph; reversed duplicates collapse, self-loops are rejected."""
    if n < 0:
        raise BadParameters("n must be non-negative")
    arr = np.array([(int(u), int(v)) for u, v in edge_list], dtype=np.int64)
    return _from_array(n, arr)


# --- generators ------------------------------------------------------------


def complete_graph(n: int) -> Graph:
    iu = np.triu_indices(n, 1)
    return Graph(n, np.stack(iu, axis=1))


def path_graph(n: int) -> Graph:
    return new_graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return gen_circulant(n, 1)


def star_graph(leaves: int) -> Graph:
    return new_graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def gen_two_cliques_matching(n: int, k: int) -> Graph:
    """Two cliques on n/2 vertices each, joined by the matching (i, n/2 + i), i < n/k."""
    # the matching has n/k edges and at most n/2 fit, so k >= 2
    if k < 2 or n % 2 or n % k or n < 3 * k:
        raise BadParameters(f"two-cliques needs k >= 2, n even, k | n and n >= 3k (n={n}, k={k})")
    h = n // 2
    a, b = np.triu_indices(h, 1)
    left = np.stack([a, b], axis=1)
    match = np.array([(i, h + i) for i in range(n // k)], dtype=np.int64).reshape(-1, 2)
    return _from_array(n, np.concatenate([left, left + h, match]))


def matching_edges(n: int, k: int) -> list[Edge]:
    return [(i, n // 2 + i) for i in range(n // k)]


def _tree_edges(t: int, shape: str, seed) -> list[Edge]:
    if shape == "path":
        return [(i, i + 1) for i in range(t - 1)]
    if shape == "star":
        return [(0, i) for i in range(1, t)]
    if shape == "random":
        rng = np.random.default_rng(seed)
        # random recursive tree: vertex i attaches to a uniform earlier vertex
        return [(int(rng.integers(0, i)), i) for i in range(1, t)]
    raise BadParameters(f"unknown tree shape {shape!r}")


def gen_leafy_tree(n: int, k: int, tree_shape: str = "path", seed=None) -> Graph:
    """A tree on n/(2k) internal vertices, each given 2k-1 pendant leaves.

    Internal vertices are ``0..n/(2k)-1``; the leaves of internal vertex u are
    ``t + u*(2k-1) ... t + (u+1)*(2k-1) - 1`` with ``t = n/(2k)``.
    """
    if k < 1 or n % (2 * k) or n // (2 * k) < 2:
        raise BadParameters(f"leafy tree needs 2k | n and n/(2k) >= 2 (n={n}, k={k})")
    t = n // (2 * k)
    edges = _tree_edges(t, tree_shape, seed)
    per = 2 * k - 1
    for u in range(t):
        base = t + u * per
        edges.extend((u, base + j) for j in range(per))
    return new_graph(n, edges)


def leafy_tree_internal_edges(n: int, k: int, tree_shape: str = "path", seed=None) -> list[Edge]:
    return [canonical(u, v) for u, v in _tree_edges(n // (2 * k), tree_shape, seed)]


def gen_clique_plus_small_cliques(n: int, k: int) -> Graph:
    """One clique on n/2 vertices plus 8k disjoint cliques on n/(16k) vertices."""
    if k < 1 or n % (16 * k) or n // (16 * k) < 2:
        raise BadParameters(f"needs 16k | n and n/(16k) >= 2 (n={n}, k={k})")
    h = n // 2
    s = n // (16 * k)
    a, b = np.triu_indices(h, 1)
    parts = [np.stack([a, b], axis=1)]
    sa, sb = np.triu_indices(s, 1)
    small = np.stack([sa, sb], axis=1)
    for c in range(8 * k):
        parts.append(small + h + c * s)
    return Graph(n, np.concatenate(parts))


def gen_circulant(n: int, d: int) -> Graph:
    """Vertex i adjacent to i +- 1, ..., i +- d (mod n)."""
    if d < 1 or 2 * d >= n:
        raise BadParameters(f"circulant needs 1 <= d < n/2 (n={n}, d={d})")
    i = np.arange(n)
    parts = [np.stack([i, (i + s) % n], axis=1) for s in range(1, d + 1)]
    return _from_array(n, np.concatenate(parts))


def gen_gnp(n: int, p: float, seed) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise BadParameters("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    a, b = np.triu_indices(n, 1)
    keep = rng.random(len(a)) < p
    return Graph(n, np.stack([a[keep], b[keep]], axis=1))


def gen_random_regular(n: int, r: int, seed, max_attempts: int = 1000) -> Graph:
    """Uniform simple r-regular graph by the pairing model with rejection."""
    if r < 0 or r >= n or (n * r) % 2:
        raise BadParameters(f"need n*r even and r < n (n={n}, r={r})")
    rng = np.random.default_rng(seed)
    points = np.repeat(np.arange(n), r)
    for _ in range(max_attempts):
        pairs = rng.permutation(points).reshape(-1, 2)
        if (pairs[:, 0] == pairs[:, 1]).any():
            continue
        canon = np.sort(pairs, axis=1)
        uniq = np.unique(canon, axis=0)
        if len(uniq) == len(canon):
            return Graph(n, uniq)
    raise GenerationFailed(f"pairing model rejected {max_attempts} times (n={n}, r={r})")


def gen_almost_regular(n: int, r: int, seed) -> Graph:
    """Random graph with all degrees in [r, 3r/2]: a random r-regular graph
    united with a random floor(r/2)-regular one."""
    import networkx as nx

    if r < 2 or r >= n or (n * r) % 2 or (n * (r // 2)) % 2:
        raise BadParameters(f"bad almost-regular parameters (n={n}, r={r})")
    ss = np.random.SeedSequence(seed).generate_state(2)
    g1 = nx.random_regular_graph(r, n, seed=int(ss[0]))
    g2 = nx.random_regular_graph(r // 2, n, seed=int(ss[1]))
    return new_graph(n, list(g1.edges()) + list(g2.edges()))


def gen_networkx_regular(n: int, r: int, seed) -> Graph:
    import networkx as nx

    if r < 0 or r >= n or (n * r) % 2:
        raise BadParameters(f"need n*r even and r < n (n={n}, r={r})")
    return new_graph(n, nx.random_regular_graph(r, n, seed=int(seed)).edges())


# --- edge-list files -------------------------------------------------------


def write_edge_list(graph: Graph, path) -> None:
    lines = [str(graph.n)] + [f"{u} {v}" for u, v in graph.edges]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def parse_edge_list(text: str) -> Graph:
    lines = [ln for ln in text.split("\n")]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty edge-list file")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ParseError(f"line 1: expected vertex count, got {lines[0]!r}") from None
    pairs = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            pairs.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer vertex in {line!r}") from None
    return new_graph(n, pairs)


def read_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text(encoding="ascii"))


def log2ceil(x: int) -> int:
    return max(1, math.ceil(math.log2(x))) if x > 1 else 1
