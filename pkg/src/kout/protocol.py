"""One-way spanning forest protocols with private randomness.

Every vertex sends one message to a referee who never sees the graph:

* main protocol: the vertex's k-out picks plus the XOR of the names of all its
  incident edges;
* alternative protocol: ``ceil(log2 n)`` independent rate-``c/sqrt(n)`` samples
  of its edges plus the same XOR sketch, consumed one sample per round.

A message's size in bits is ``(#edges) * 2 * ceil(log2 n) + name_length``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from kout import rng as _rng
from kout.connectivity import Forest, UnionFind, components, is_acyclic
from kout.errors import BadParameters, DecodeFailure, MissingMessage, SchemeMismatch
from kout.graph import Edge, Graph, log2ceil
from kout.naming import NamingScheme, make_scheme
from kout.sampling import _slot_choices, _slot_raw, vertex_k_out_choice


@dataclass(frozen=True)
class VertexMessage:
    sender: int
    sampled_edges: tuple[Edge, ...]
    sketch: int
    bit_count: int


@dataclass(frozen=True)
class AltVertexMessage:
    sender: int
    sample_rounds: tuple[tuple[Edge, ...], ...]
    sketch: int
    bit_count: int


@dataclass(frozen=True)
class ProtocolOutcome:
    forest: Forest
    success: bool
    decode_failures: int
    max_bits: int
    mean_bits: float
    decode_calls: int = 0
    rounds_used: int | None = None
    referee_success: bool | None = None

    def csv_row(self, family: str, n: int, k, r: int, scheme_kind: str, seed: int) -> dict:
        return {
            "family": family, "n": n, "k": k, "r": r, "scheme_kind": scheme_kind,
            "seed": seed, "success": int(self.success),
            "decode_failures": self.decode_failures, "max_bits": self.max_bits,
            "mean_bits": f"{self.mean_bits:.6g}",
        }


def id_bits(n: int) -> int:
    return log2ceil(n)


def message_bits(n: int, edge_count: int, scheme: NamingScheme) -> int:
    return edge_count * 2 * id_bits(n) + scheme.length


def make_message(g: Graph, v: int, k: int, scheme: NamingScheme,
                 rng: _rng.RngStream, sketch: int | None = None) -> VertexMessage:
    """Vertex v's message: its own k-out picks plus its sketch."""
    if scheme.n != g.n:
        raise SchemeMismatch(f"scheme is over K_{scheme.n}, graph has {g.n} vertices")
    picks = tuple(vertex_k_out_choice(g, v, k, rng))
    if sketch is None:
        sketch = scheme.vertex_sketch(g, v)
    return VertexMessage(v, picks, sketch, message_bits(g.n, len(picks), scheme))


def make_messages(g: Graph, k: int, scheme: NamingScheme, rng: _rng.RngStream,
                  sketches: list[int] | None = None) -> list[VertexMessage]:
    """All n messages at once; identical to calling make_message per vertex."""
    if scheme.n != g.n:
        raise SchemeMismatch(f"scheme is over K_{scheme.n}, graph has {g.n} vertices")
    if sketches is None:
        sketches = scheme.vertex_sketches(g)
    if g.m:
        chosen = _slot_choices(g, "k-out", k, np.uint64(rng.master_seed))
    else:
        chosen = np.zeros(0, dtype=bool)
    lo = np.minimum(g.slot_owner, g.nbrs)
    hi = np.maximum(g.slot_owner, g.nbrs)
    out = []
    for v in range(g.n):
        a, b = int(g.indptr[v]), int(g.indptr[v + 1])
        sel = np.flatnonzero(chosen[a:b]) + a
        picks = tuple(zip(lo[sel].tolist(), hi[sel].tolist()))
        out.append(VertexMessage(v, picks, sketches[v], message_bits(g.n, len(picks), scheme)))
    return out


def _check_messages(messages, scheme: NamingScheme, n: int) -> list:
    if scheme.n != n:
        raise SchemeMismatch(f"scheme is over K_{scheme.n}, expected n={n}")
    by_sender = {}
    for msg in messages:
        if msg.sketch < 0 or msg.sketch >> scheme.length:
            raise SchemeMismatch(f"sketch of vertex {msg.sender} is not {scheme.length} bits")
        by_sender[msg.sender] = msg
    missing = [v for v in range(n) if v not in by_sender]
    if missing or len(by_sender) != n:
        raise MissingMessage(f"no message from vertices {missing[:10]}")
    return [by_sender[v] for v in range(n)]


def _groups(uf: UnionFind, n: int) -> list[list[int]]:
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(uf.find(v), []).append(v)
    # smallest component first, ties by lowest member
    return sorted(groups.values(), key=lambda g: (len(g), g[0]))


def _fold(sketches: list[int], members: list[int]) -> int:
    x = 0
    for v in members:
        x ^= sketches[v]
    return x


def _crosses(e: Edge, inside: set[int]) -> bool:
    return (e[0] in inside) != (e[1] in inside)


def _bits_stats(messages) -> tuple[int, float]:
    bits = [m.bit_count for m in messages]
    return (max(bits), float(np.mean(bits))) if bits else (0, 0.0)


def referee(messages, scheme: NamingScheme, n: int) -> ProtocolOutcome:
    """Rebuild a spanning forest from the messages alone.

    The union of the sampled edges gives a forest of the k-out subgraph. Then,
    wave by wave and smallest component first, each component's folded sketch
    is either zero (the component is final) or decoded into its cut edges,
    which extend the forest. A decoded edge that does not cross its component
    counts as a decode failure.
    """
    msgs = _check_messages(messages, scheme, n)
    sketches = [m.sketch for m in msgs]
    max_bits, mean_bits = _bits_stats(msgs)
    uf = UnionFind(n)
    forest: set[Edge] = set()
    sampled = sorted({e for m in msgs for e in m.sampled_edges})
    for u, v in sampled:
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise SchemeMismatch(f"message carries invalid edge {(u, v)}")
        if uf.union(u, v):
            forest.add((u, v))

    calls = failures = 0
    while True:
        merged = False
        pending = False
        for members in _groups(uf, n):
            x = _fold(sketches, members)
            if x == 0:
                continue
            pending = True
            if uf.size[uf.find(members[0])] != len(members):
                # already absorbed earlier in this wave; revisit next wave
                continue
            calls += 1
            try:
                cut = scheme.decode(x, scheme.r)
            except DecodeFailure:
                failures += 1
                return ProtocolOutcome(Forest(frozenset(forest)), False, failures,
                                       max_bits, mean_bits, calls)
            inside = set(members)
            if not cut or not all(_crosses(e, inside) for e in cut):
                failures += 1
                return ProtocolOutcome(Forest(frozenset(forest)), False, failures,
                                       max_bits, mean_bits, calls)
            for u, v in sorted(cut):
                if uf.union(u, v):
                    forest.add((u, v))
                    merged = True
        if not pending:
            break
        if not merged:
            # nonzero sketches but every decoded edge was already absorbed
            failures += 1
            return ProtocolOutcome(Forest(frozenset(forest)), False, failures,
                                   max_bits, mean_bits, calls)
    return ProtocolOutcome(Forest(frozenset(forest)), True, failures, max_bits, mean_bits, calls)


def verify_forest(g: Graph, outcome) -> bool:
    """Ground-truth audit: forest within E(G), acyclic, same components as G."""
    forest = outcome.forest if hasattr(outcome, "forest") else outcome
    edges = sorted(forest.edges)
    if not all(g.has_edge(u, v) for u, v in edges):
        return False
    if not is_acyclic(g.n, edges):
        return False
    return components(g.n, edges).same_as(components(g.n, g.edges))


def default_k(n: int) -> int:
    return max(1, math.ceil(math.sqrt(n)))


def default_r(n: int, c: float = 1.0) -> int:
    return max(1, math.ceil(c * math.sqrt(n)))


def run_protocol(g: Graph, k: int | None = None, r: int | None = None,
                 scheme_kind: str = "bch", master_seed: int = 0, c: float = 1.0,
                 scheme: NamingScheme | None = None,
                 sketches: list[int] | None = None) -> ProtocolOutcome:
    """Messages, referee, then the ground-truth check.

    ``success`` in the result is true only if the referee believed it succeeded
    and its forest passes verify_forest.
    """
    n = g.n
    k = default_k(n) if k is None else k
    r = default_r(n, c) if r is None else r
    if scheme is None:
        scheme = make_scheme(scheme_kind, n, r, seed=master_seed)
    msgs = make_messages(g, k, scheme, _rng.RngStream(master_seed), sketches)
    out = referee(msgs, scheme, n)
    ok = out.success and verify_forest(g, out)
    return replace(out, success=ok, referee_success=out.success)


# --- alternative protocol --------------------------------------------------


def alt_rounds(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


def alt_resilience(n: int, c: float) -> int:
    return max(1, math.ceil(c * math.sqrt(n) * math.log2(max(n, 2))))


def alt_weight_cap(n: int, r: int) -> int:
    return min(r, max(1, math.ceil(math.sqrt(n) * math.log2(max(n, 2)))))


def _round_seed(master_seed: int, i: int) -> np.uint64:
    return np.uint64(_rng.trial_seed(int(_rng.mix64(np.uint64(master_seed))), i))


def make_alt_messages(g: Graph, c: float, scheme: NamingScheme, rng: _rng.RngStream,
                      sketches: list[int] | None = None) -> list[AltVertexMessage]:
    if scheme.n != g.n:
        raise SchemeMismatch(f"scheme is over K_{scheme.n}, graph has {g.n} vertices")
    n = g.n
    if sketches is None:
        sketches = scheme.vertex_sketches(g)
    q = min(1.0, c / math.sqrt(n)) if n > 1 else 1.0
    lo = np.minimum(g.slot_owner, g.nbrs)
    hi = np.maximum(g.slot_owner, g.nbrs)
    rounds = []
    for i in range(alt_rounds(n)):
        if g.m:
            keep = _rng.to_unit(_slot_raw(g, _round_seed(rng.master_seed, i))) < q
        else:
            keep = np.zeros(0, dtype=bool)
        rounds.append(keep)
    out = []
    for v in range(n):
        a, b = int(g.indptr[v]), int(g.indptr[v + 1])
        per_round = []
        for keep in rounds:
            sel = np.flatnonzero(keep[a:b]) + a
            per_round.append(tuple(zip(lo[sel].tolist(), hi[sel].tolist())))
        total = sum(len(x) for x in per_round)
        out.append(AltVertexMessage(v, tuple(per_round), sketches[v],
                                    message_bits(n, total, scheme)))
    return out


def alt_referee(messages, scheme: NamingScheme, n: int) -> ProtocolOutcome:
    """Round-by-round referee: round i looks only at sample i.

    A component with a sample-i edge leaving it merges along the lowest such
    edge; one without has its sketch decoded and merges along the decoded cut.
    Components whose folded sketch is zero are final.
    """
    msgs = _check_messages(messages, scheme, n)
    sketches = [m.sketch for m in msgs]
    max_bits, mean_bits = _bits_stats(msgs)
    cap = alt_weight_cap(n, scheme.r)
    total_rounds = alt_rounds(n)
    uf = UnionFind(n)
    forest: set[Edge] = set()
    calls = failures = 0
    used = 0

    def done(ok: bool) -> ProtocolOutcome:
        return ProtocolOutcome(Forest(frozenset(forest)), ok, failures, max_bits,
                               mean_bits, calls, used)

    for i in range(total_rounds):
        groups = [g for g in _groups(uf, n) if _fold(sketches, g) != 0]
        if not groups:
            return done(True)
        used = i + 1
        label = [uf.find(v) for v in range(n)]
        leaving: dict[int, Edge] = {}
        for e in sorted({e for m in msgs for e in m.sample_rounds[i]}):
            a, b = label[e[0]], label[e[1]]
            if a != b:
                leaving.setdefault(a, e)
                leaving.setdefault(b, e)
        for members in groups:
            root = label[members[0]]
            e = leaving.get(root)
            if e is not None:
                if uf.union(*e):
                    forest.add(e)
                continue
            calls += 1
            try:
                cut = scheme.decode(_fold(sketches, members), cap)
            except DecodeFailure:
                failures += 1
                return done(False)
            inside = set(members)
            if not cut or not all(_crosses(x, inside) for x in cut):
                failures += 1
                return done(False)
            for x in sorted(cut):
                if uf.union(*x):
                    forest.add(x)
    leftover = [g for g in _groups(uf, n) if _fold(sketches, g) != 0]
    return done(not leftover)


def alt_protocol(g: Graph, c: float = 2.0, master_seed: int = 0, scheme_kind: str = "bch",
                 scheme: NamingScheme | None = None,
                 sketches: list[int] | None = None) -> ProtocolOutcome:
    if c < 2:
        raise BadParameters("the alternative protocol needs c >= 2")
    n = g.n
    if scheme is None:
        scheme = make_scheme(scheme_kind, n, alt_resilience(n, c), seed=master_seed)
    msgs = make_alt_messages(g, c, scheme, _rng.RngStream(master_seed), sketches)
    out = alt_referee(msgs, scheme, n)
    ok = out.success and verify_forest(g, out)
    return replace(out, success=ok, referee_success=out.success)
