"""Resilient edge names for the potential edges of K_n, XOR sketches of edge
sets and vertices, and syndrome decoding.

A name is an ``length``-bit Python int; the XOR group is int ``^``.
Potential edge {u, v}, u < v, has 1-based index
``u*n - u*(u+1)/2 + (v - u)`` in ``[1, C(n, 2)]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable

import numpy as np

from kout import rng as _rng
from kout.errors import BadParameters, DecodeFailure, EdgeOutOfUniverse, FieldTooSmall
from kout.gf2m import GF2m, PRIMITIVE_POLYS, field
from kout.graph import Edge, Graph

RANDOM_DECODE_MAX_UNIVERSE = 2000
RANDOM_DECODE_MAX_WEIGHT = 6
RANDOM_DECODE_BUDGET = 3_000_000


def universe_size(n: int) -> int:
    return n * (n - 1) // 2


def edge_index(n: int, u, v):
    """1-based index of the potential edge {u, v} (vectorizes over arrays)."""
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    idx = lo * n - lo * (lo + 1) // 2 + (hi - lo)
    return int(idx) if np.ndim(idx) == 0 else idx


def edge_from_index(n: int, idx: int) -> Edge:
    if not 1 <= idx <= universe_size(n):
        raise EdgeOutOfUniverse(f"index {idx} outside [1, {universe_size(n)}]")
    u = 0
    # row u holds indices (u*n - u(u+1)/2, (u+1)*n - (u+1)(u+2)/2]
    while (u + 1) * n - (u + 1) * (u + 2) // 2 < idx:
        u += 1
    v = idx - (u * n - u * (u + 1) // 2) + u
    return (u, v)


def edges_from_indices(n: int, idx: np.ndarray) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    row_end = np.array([(u + 1) * n - (u + 1) * (u + 2) // 2 for u in range(n)], dtype=np.int64)
    u = np.searchsorted(row_end, idx)
    v = idx - (u * n - u * (u + 1) // 2) + u
    return np.stack([u, v], axis=-1)


def random_name_length(n: int, r: int) -> int:
    return math.ceil(4 * r * math.log2(n))


def bch_field_degree(n: int) -> int:
    """Smallest tabulated m with 2^m - 1 >= C(n, 2)."""
    need = universe_size(n)
    for m in sorted(PRIMITIVE_POLYS):
        if (1 << m) - 1 >= need:
            return m
    raise FieldTooSmall(f"C({n},2) = {need} exceeds 2^{max(PRIMITIVE_POLYS)} - 1")


@dataclass(frozen=True, eq=False)
class NamingScheme:
    n: int
    r: int
    length: int
    kind: str

    @property
    def universe(self) -> int:
        return universe_size(self.n)

    # subclasses: name_blocks(indices) -> 2-D int array, pack(row) -> int

    def check_index(self, idx) -> None:
        a = np.asarray(idx)
        if a.size and (a.min() < 1 or a.max() > self.universe):
            raise EdgeOutOfUniverse(f"edge index outside [1, {self.universe}]")

    def index_of(self, e: Edge) -> int:
        u, v = int(e[0]), int(e[1])
        if u == v or not (0 <= u < self.n and 0 <= v < self.n):
            raise EdgeOutOfUniverse(f"{e} is not a potential edge of K_{self.n}")
        return edge_index(self.n, u, v)

    def name(self, u: int, v: int) -> int:
        return self.pack(self.name_blocks(np.array([self.index_of((u, v))]))[0])

    def bits(self, value: int) -> str:
        return format(value, f"0{self.length}b")

    def xor_indices(self, idx: np.ndarray) -> int:
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size == 0:
            return 0
        self.check_index(idx)
        return self.pack(np.bitwise_xor.reduce(self.name_blocks(idx), axis=0))

    def xor_names(self, edges: Iterable[Edge]) -> int:
        edges = set(edges)
        if not edges:
            return 0
        idx = np.array([self.index_of(e) for e in edges], dtype=np.int64)
        return self.xor_indices(idx)

    def vertex_sketch(self, g: Graph, v: int) -> int:
        self._check_graph(g)
        nb = g.neighbors(v)
        if len(nb) == 0:
            return 0
        return self.xor_indices(edge_index(self.n, np.full(len(nb), v), nb))

    def vertex_sketches(self, g: Graph) -> list[int]:
        """Sketch of every vertex, computed with one pass over the adjacency."""
        self._check_graph(g)
        out = [0] * g.n
        if g.m == 0:
            return out
        blocks = self.name_blocks(edge_index(self.n, g.slot_owner, g.nbrs))
        nonempty = np.flatnonzero(g.degrees > 0)
        # slots are grouped by owner, so each vertex is one contiguous run
        folded = np.bitwise_xor.reduceat(blocks, g.indptr[nonempty], axis=0)
        for v, row in zip(nonempty.tolist(), folded):
            out[v] = self.pack(row)
        return out

    def _check_graph(self, g: Graph) -> None:
        if g.n > self.n:
            raise BadParameters(f"scheme covers K_{self.n}, graph has {g.n} vertices")

    def descriptor(self) -> dict:
        raise NotImplementedError

    def decode(self, syndrome: int, weight_cap: int) -> frozenset[Edge]:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class RandomNames(NamingScheme):
    """Independent uniform names; ``name(i)`` is stream i of ``seed``."""

    seed: int = 0

    @property
    def block_count(self) -> int:
        return (self.length + 63) // 64

    block_dtype = np.uint64

    def name_blocks(self, idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        keys = _rng.stream_keys(self.seed, idx)[:, None]
        words = _rng.draws(keys, np.arange(self.block_count, dtype=np.uint64)[None, :])
        spare = self.block_count * 64 - self.length
        if spare:
            words[:, -1] &= np.uint64((1 << (64 - spare)) - 1)
        return words

    def pack(self, row: np.ndarray) -> int:
        return int.from_bytes(np.asarray(row, dtype="<u8").tobytes(), "little")

    def descriptor(self) -> dict:
        return {"kind": "random", "n": self.n, "r": self.r, "length": self.length,
                "seed": self.seed}

    @cached_property
    def _all_names(self) -> list[int]:
        idx = np.arange(1, self.universe + 1, dtype=np.int64)
        return [self.pack(row) for row in self.name_blocks(idx)]

    def decode(self, syndrome: int, weight_cap: int) -> frozenset[Edge]:
        """Meet-in-the-middle search for the lightest matching edge set."""
        if weight_cap > self.r:
            raise BadParameters("weight_cap exceeds the scheme's resilience")
        if syndrome == 0:
            return frozenset()
        cap = min(weight_cap, RANDOM_DECODE_MAX_WEIGHT)
        if self.universe > RANDOM_DECODE_MAX_UNIVERSE:
            raise DecodeFailure(f"universe {self.universe} too large for subset search")
        names = self._all_names
        big_n = len(names)
        halves: dict[int, dict[int, tuple]] = {}

        def half(b: int) -> dict[int, tuple]:
            if b not in halves:
                table: dict[int, tuple] = {}
                for sub in combinations(range(big_n), b):
                    x = 0
                    for i in sub:
                        x ^= names[i]
                    table.setdefault(x, sub)
                halves[b] = table
            return halves[b]

        for t in range(1, cap + 1):
            a, b = (t + 1) // 2, t // 2
            if math.comb(big_n, a) + math.comb(big_n, b) > RANDOM_DECODE_BUDGET:
                raise DecodeFailure(f"subset search budget exceeded at weight {t}")
            table = half(b)
            for sub in combinations(range(big_n), a):
                x = syndrome
                for i in sub:
                    x ^= names[i]
                other = table.get(x)
                if other is not None and not set(other) & set(sub):
                    idx = sorted(i + 1 for i in (*sub, *other))
                    return frozenset(edge_from_index(self.n, i) for i in idx)
        raise DecodeFailure(f"no edge set of weight <= {cap} matches")


@dataclass(frozen=True, eq=False)
class BCHNames(NamingScheme):
    """Parity-check columns of a binary BCH code of designed distance 2r+1.

    Edge index i is named by the field elements alpha^i, alpha^3i, ...,
    alpha^(2r-1)i; block j of the name occupies bits ``[j*m, (j+1)*m)``.
    """

    m: int = 0
    poly: int = 0

    block_dtype = np.int64

    @property
    def block_count(self) -> int:
        return self.r

    @property
    def gf(self) -> GF2m:
        return field(self.m)

    def name_blocks(self, idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        odd = np.arange(1, 2 * self.r, 2, dtype=np.int64)
        e = (idx[:, None] % self.gf.order) * odd[None, :]
        return self.gf.alpha_pow_array(e)

    def pack(self, row) -> int:
        out = 0
        for j, x in enumerate(np.asarray(row).tolist()):
            out |= int(x) << (self.m * j)
        return out

    def unpack(self, value: int) -> list[int]:
        mask = (1 << self.m) - 1
        return [(value >> (self.m * j)) & mask for j in range(self.r)]

    def descriptor(self) -> dict:
        return {"kind": "bch", "n": self.n, "r": self.r, "length": self.length,
                "m": self.m, "primitive_polynomial": hex(self.poly)}

    def decode(self, syndrome: int, weight_cap: int) -> frozenset[Edge]:
        """Berlekamp-Massey error locator, then a root scan over edge indices."""
        if weight_cap > self.r:
            raise BadParameters("weight_cap exceeds the scheme's resilience")
        if syndrome == 0:
            return frozenset()
        if syndrome >> self.length:
            raise DecodeFailure("syndrome longer than the name length")
        gf = self.gf
        odd = self.unpack(syndrome)
        s = [0] * (2 * self.r + 1)
        for j, x in enumerate(odd):
            s[2 * j + 1] = x
        for i in range(2, 2 * self.r + 1, 2):
            s[i] = gf.mul(s[i // 2], s[i // 2])
        locator = berlekamp_massey(gf, s[1:])
        weight = len(locator) - 1
        if weight > weight_cap:
            raise DecodeFailure(f"error locator degree {weight} exceeds cap {weight_cap}")
        positions = self._roots(locator)
        if len(positions) != weight:
            raise DecodeFailure(f"locator of degree {weight} has {len(positions)} roots in range")
        if self.xor_indices(positions) != syndrome:
            raise DecodeFailure("decoded set does not reproduce the syndrome")
        return frozenset(map(tuple, edges_from_indices(self.n, positions).tolist()))

    def _roots(self, locator: list[int]) -> np.ndarray:
        """Indices i in [1, C(n,2)] with locator(alpha^-i) == 0."""
        gf = self.gf
        idx = np.arange(1, self.universe + 1, dtype=np.int64)
        if not gf.tabled:
            hits = []
            for i in idx.tolist():
                acc = 0
                for j, c in enumerate(locator):
                    if c:
                        acc ^= gf.mul(c, gf.alpha_pow(-i * j))
                if acc == 0:
                    hits.append(i)
            return np.array(hits, dtype=np.int64)
        acc = np.full(len(idx), locator[0], dtype=np.int64)
        for j, c in enumerate(locator[1:], start=1):
            if c:
                acc ^= gf.exp[(gf.log[c] - idx * j) % gf.order]
        return idx[acc == 0]


def berlekamp_massey(gf: GF2m, s: list[int]) -> list[int]:
    """Shortest LFSR (connection polynomial, constant term first) generating s."""
    c = [1]
    b = [1]
    big_l = 0
    shift = 1
    bd = 1
    for k in range(len(s)):
        d = s[k]
        for i in range(1, big_l + 1):
            if i < len(c) and c[i]:
                d ^= gf.mul(c[i], s[k - i])
        if d == 0:
            shift += 1
            continue
        coef = gf.mul(d, gf.inv(bd))
        t = list(c)
        need = len(b) + shift
        if len(c) < need:
            c.extend([0] * (need - len(c)))
        for i, bi in enumerate(b):
            if bi:
                c[i + shift] ^= gf.mul(coef, bi)
        if 2 * big_l <= k:
            big_l = k + 1 - big_l
            b = t
            bd = d
            shift = 1
        else:
            shift += 1
    c = c[:big_l + 1] + [0] * max(0, big_l + 1 - len(c))
    return c


def random_names(n: int, r: int, seed: int = 0) -> RandomNames:
    if n < 2 or r < 1:
        raise BadParameters("random names need n >= 2 and r >= 1")
    return RandomNames(n=n, r=r, length=random_name_length(n, r), kind="random",
                       seed=int(seed) & _rng.MASK64)


def bch_names(n: int, r: int, m: int | None = None) -> BCHNames:
    if r < 1 or n < 2:
        raise BadParameters("BCH names need n >= 2 and r >= 1")
    if m is None:
        m = bch_field_degree(n)
    elif m not in PRIMITIVE_POLYS or (1 << m) - 1 < universe_size(n):
        raise FieldTooSmall(f"GF(2^{m}) cannot index C({n},2) = {universe_size(n)} edges")
    return BCHNames(n=n, r=r, length=r * m, kind="bch", m=m, poly=PRIMITIVE_POLYS[m])


def make_scheme(kind: str, n: int, r: int, seed: int = 0) -> NamingScheme:
    if kind == "bch":
        return bch_names(n, r)
    if kind == "random":
        return random_names(n, r, seed)
    raise BadParameters(f"unknown scheme kind {kind!r}")


def scheme_from_descriptor(desc: dict) -> NamingScheme:
    if desc["kind"] == "bch":
        s = bch_names(int(desc["n"]), int(desc["r"]), int(desc["m"]))
    elif desc["kind"] == "random":
        s = random_names(int(desc["n"]), int(desc["r"]), int(desc["seed"]))
    else:
        raise BadParameters(f"unknown scheme kind {desc['kind']!r}")
    if s.length != int(desc["length"]):
        raise BadParameters("descriptor length does not match its parameters")
    return s


def xor_names(scheme: NamingScheme, edges: Iterable[Edge]) -> int:
    return scheme.xor_names(edges)


def vertex_sketch(g: Graph, scheme: NamingScheme, v: int) -> int:
    return scheme.vertex_sketch(g, v)


def decode(scheme: NamingScheme, syndrome: int, weight_cap: int) -> frozenset[Edge]:
    return scheme.decode(syndrome, weight_cap)
