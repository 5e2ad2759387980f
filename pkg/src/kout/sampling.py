"""Exact k-out, expected k-out and independent-p edge sampling.

Vertex v's choices come only from stream v of the trial seed. Slot j of v's
sorted adjacency list gets the j-th draw of that stream as a random sort key,
and v keeps its ``min(k, deg v)`` smallest keys. Sorting by iid keys is a
uniform shuffle, so the kept prefix is a uniform subset, and for a fixed seed
the k-sample is contained in every k'-sample with k' > k.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from kout import rng as _rng
from kout.errors import BadParameters
from kout.graph import Edge, Graph

Model = Literal["k-out", "expected-k-out", "p-sample"]
MODELS: tuple[str, ...] = ("k-out", "expected-k-out", "p-sample")

_OWNER_SHIFT = 44


@dataclass(frozen=True, eq=False)
class EdgeSample:
    """A sampled edge subset of ``graph`` with per-endpoint chooser flags.

    ``by_u[i]`` / ``by_v[i]`` say whether the lower / higher endpoint of edge
    ``graph.edge_array[i]`` picked it.
    """

    graph: Graph
    by_u: np.ndarray
    by_v: np.ndarray
    model_tag: str
    param: float

    @property
    def mask(self) -> np.ndarray:
        return self.by_u | self.by_v

    @property
    def edge_ids(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @property
    def edge_array(self) -> np.ndarray:
        return self.graph.edge_array[self.mask]

    @cached_property
    def edges(self) -> frozenset[Edge]:
        return frozenset((int(u), int(v)) for u, v in self.edge_array)

    def __len__(self) -> int:
        return int(self.mask.sum())

    def chosen_by(self, v: int) -> list[Edge]:
        """Edges carrying v's chooser flag."""
        g = self.graph
        ea = g.edge_array
        flags = (self.by_u & (ea[:, 0] == v)) | (self.by_v & (ea[:, 1] == v))
        return [(int(a), int(b)) for a, b in ea[flags]]

    def chooser_counts(self) -> np.ndarray:
        ea = self.graph.edge_array
        n = self.graph.n
        return (np.bincount(ea[self.by_u, 0], minlength=n)
                + np.bincount(ea[self.by_v, 1], minlength=n))

    def __eq__(self, other) -> bool:
        if not isinstance(other, EdgeSample):
            return NotImplemented
        return (self.graph == other.graph and self.model_tag == other.model_tag
                and self.param == other.param
                and np.array_equal(self.by_u, other.by_u)
                and np.array_equal(self.by_v, other.by_v))


def _slot_raw(g: Graph, seeds, owners=None, slots=None) -> np.ndarray:
    """Raw draws for directed slots; ``seeds`` may be a column of trial seeds."""
    if owners is None:
        owners = g.slot_owner
        slots = np.arange(len(owners), dtype=np.int64)
    local = slots - g.indptr[owners]
    keys = _rng.stream_keys(np.asarray(seeds, dtype=np.uint64), owners)
    return _rng.draws(keys, local)


def _prefix_ranks(g: Graph, raw: np.ndarray) -> np.ndarray:
    """Rank of every slot among its owner's slots when ordered by draw."""
    owners = g.slot_owner.astype(np.uint64)
    if g.n < (1 << (64 - _OWNER_SHIFT)):
        sort_key = (owners << np.uint64(_OWNER_SHIFT)) | (raw >> np.uint64(64 - _OWNER_SHIFT))
        order = np.argsort(sort_key, axis=-1, kind="stable")
    elif raw.ndim == 1:
        order = np.lexsort((raw, owners))
    else:
        order = np.stack([np.lexsort((row, owners)) for row in raw])
    pos = np.arange(raw.shape[-1], dtype=np.int64)
    start = g.indptr[g.slot_owner]
    ranks = np.empty(raw.shape, dtype=np.int64)
    # within each owner block the sorted position minus block start is the rank
    np.put_along_axis(ranks, order, np.broadcast_to(pos - start, raw.shape), axis=-1)
    return ranks


def _slot_choices(g: Graph, model: str, param: float, seeds) -> np.ndarray:
    """Boolean slot-choice array, shape ``seeds.shape[:-1] + (2m,)``."""
    if model == "k-out":
        if param < 1:
            raise BadParameters("k must be >= 1")
        return _prefix_ranks(g, _slot_raw(g, seeds)) < int(param)
    if model == "expected-k-out":
        if param < 1:
            raise BadParameters("k must be >= 1")
        deg = g.degrees[g.slot_owner].astype(np.float64)
        prob = param / np.maximum(float(param), deg)
        return _rng.to_unit(_slot_raw(g, seeds)) < prob
    raise BadParameters(f"unknown slot model {model!r}")


def _flags_from_slots(g: Graph, chosen: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = g.m
    low = g.slot_owner < g.nbrs
    shape = chosen.shape[:-1] + (m,)
    by_u = np.zeros(shape, dtype=bool)
    by_v = np.zeros(shape, dtype=bool)
    by_u[..., g.slot_edge[low]] = chosen[..., low]
    by_v[..., g.slot_edge[~low]] = chosen[..., ~low]
    return by_u, by_v


def _low_slot_of_edge(g: Graph) -> np.ndarray:
    low = np.flatnonzero(g.slot_owner < g.nbrs)
    out = np.empty(g.m, dtype=np.int64)
    out[g.slot_edge[low]] = low
    return out


def _p_mask(g: Graph, p: float, seeds) -> np.ndarray:
    if not 0.0 <= p <= 1.0:
        raise BadParameters("p must lie in [0, 1]")
    slots = _low_slot_of_edge(g)
    # the decision for {u, v} is drawn from the lower endpoint's stream
    raw = _slot_raw(g, seeds, g.slot_owner[slots], slots)
    return _rng.to_unit(raw) < p


def sample_masks(g: Graph, model: str, param: float, seeds: np.ndarray) -> np.ndarray:
    """Edge-presence masks for a batch of trial seeds, shape ``(T, m)``."""
    seeds = np.asarray(seeds, dtype=np.uint64).reshape(-1, 1)
    if g.m == 0:
        return np.zeros((len(seeds), 0), dtype=bool)
    if model == "p-sample":
        return _p_mask(g, param, seeds)
    by_u, by_v = _flags_from_slots(g, _slot_choices(g, model, param, seeds))
    return by_u | by_v


def _seed_of(rng: _rng.RngStream) -> np.ndarray:
    return np.uint64(rng.master_seed)


def k_out_sample(g: Graph, k: int, rng: _rng.RngStream) -> EdgeSample:
    """Each vertex picks ``min(k, deg v)`` incident edges uniformly at random."""
    if k < 1:
        raise BadParameters("k must be >= 1")
    if g.m == 0:
        z = np.zeros(0, dtype=bool)
        return EdgeSample(g, z, z.copy(), "k-out", k)
    by_u, by_v = _flags_from_slots(g, _slot_choices(g, "k-out", k, _seed_of(rng)))
    return EdgeSample(g, by_u, by_v, "k-out", k)


def expected_k_out_sample(g: Graph, k: int, rng: _rng.RngStream) -> EdgeSample:
    """Each vertex keeps each incident edge with probability ``k / max(k, deg v)``."""
    if k < 1:
        raise BadParameters("k must be >= 1")
    if g.m == 0:
        z = np.zeros(0, dtype=bool)
        return EdgeSample(g, z, z.copy(), "expected-k-out", k)
    chosen = _slot_choices(g, "expected-k-out", k, _seed_of(rng))
    by_u, by_v = _flags_from_slots(g, chosen)
    return EdgeSample(g, by_u, by_v, "expected-k-out", k)


def p_sample(g: Graph, p: float, rng: _rng.RngStream) -> EdgeSample:
    """Keep every edge independently with probability p."""
    if g.m == 0:
        if not 0.0 <= p <= 1.0:
            raise BadParameters("p must lie in [0, 1]")
        z = np.zeros(0, dtype=bool)
        return EdgeSample(g, z, z.copy(), "p-sample", p)
    mask = _p_mask(g, p, _seed_of(rng))
    return EdgeSample(g, mask, mask.copy(), "p-sample", p)


def vertex_k_out_choice(g: Graph, v: int, k: int, rng: _rng.RngStream) -> list[Edge]:
    """Vertex v's own k-out picks, computed from its stream alone."""
    lo, hi = int(g.indptr[v]), int(g.indptr[v + 1])
    if hi == lo:
        return []
    slots = np.arange(lo, hi, dtype=np.int64)
    raw = _slot_raw(g, _seed_of(rng), np.full(hi - lo, v, dtype=np.int64), slots)
    if g.n < (1 << (64 - _OWNER_SHIFT)):
        raw = raw >> np.uint64(64 - _OWNER_SHIFT)
    keep = np.argsort(raw, kind="stable")[:k]
    nb = g.nbrs[lo:hi][np.sort(keep)]
    return [(v, int(w)) if v < w else (int(w), v) for w in nb]


def sample(g: Graph, model: str, param: float, rng: _rng.RngStream) -> EdgeSample:
    if model == "k-out":
        return k_out_sample(g, int(param), rng)
    if model == "expected-k-out":
        return expected_k_out_sample(g, int(param), rng)
    if model == "p-sample":
        return p_sample(g, float(param), rng)
    raise BadParameters(f"unknown model {model!r}")


def edge_inclusion_prob(g: Graph, k: int, e: Edge) -> float:
    """Probability that edge e survives expected k-out sampling."""
    u, v = e
    g.edge_id(u, v)
    du, dv = g.degree(u), g.degree(v)
    if min(du, dv) <= k:
        return 1.0
    a, b = k / du, k / dv
    return a + b - a * b
