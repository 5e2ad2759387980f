"""Round-by-round simulation of the four-round MapReduce-like spanning forest
algorithm, with word accounting per machine.

Machines: ``0..n-1`` hold one vertex each, ``n`` is the referee, ``n+1`` the
final machine. A word is ``ceil(log2(n+2))`` bits; an edge costs two words.
The input is recirculated every round as the directed pairs (u, v), (v, u),
so vertex machine v is charged ``2*deg(v)`` input words each round.

Rounds:
  1. vertex machines send their k-out picks (plus one header word) to the referee;
  2. the referee computes a spanning forest F of the k-out subgraph and hands it
     to the broadcast primitive;
  3. the broadcast delivers F to every vertex machine (modeled cost: 2|F|
     words per recipient, never more than 2(n-1));
  4. vertex machines send their inter-component edges (lower endpoint only) to
     the final machine, F is recirculated there, and the final machine computes
     the output forest.

A machine's load in a round is the words it receives plus the words it sends.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from kout import rng as _rng
from kout.connectivity import Forest, UnionFind, spanning_forest
from kout.errors import BudgetExceeded
from kout.graph import Edge, Graph
from kout.sampling import _slot_choices

ROUNDS = 4
HEADER_WORDS = 1


@dataclass(frozen=True)
class KeyedMessage:
    key: int
    payload: tuple

    @property
    def words(self) -> int:
        return len(self.payload)


def edge_message(key: int, edges, header: tuple = ()) -> KeyedMessage:
    flat = list(header)
    for u, v in edges:
        flat.extend((u, v))
    return KeyedMessage(key, tuple(flat))


@dataclass
class RoundTrace:
    round_index: int
    budget: int
    words_in: dict[int, int] = field(default_factory=dict)
    words_out: dict[int, int] = field(default_factory=dict)
    modeled: bool = False

    def held(self, machine: int) -> int:
        return self.words_in.get(machine, 0) + self.words_out.get(machine, 0)

    @property
    def machines(self) -> list[int]:
        return sorted(set(self.words_in) | set(self.words_out))

    @property
    def violations(self) -> list[int]:
        return [mach for mach in self.machines if self.held(mach) > self.budget]


def word_bits(n: int) -> int:
    return max(1, math.ceil(math.log2(n + 2)))


class _Round:
    def __init__(self, index: int, budget: int, modeled: bool = False):
        self.trace = RoundTrace(index, budget, modeled=modeled)
        self.outboxes: dict[int, list[KeyedMessage]] = {}

    def receive(self, machine: int, words: int) -> None:
        self.trace.words_in[machine] = self.trace.words_in.get(machine, 0) + words

    def send(self, machine: int, msg: KeyedMessage) -> None:
        self.trace.words_out[machine] = self.trace.words_out.get(machine, 0) + msg.words
        self.outboxes.setdefault(msg.key, []).append(msg)

    def close(self) -> RoundTrace:
        tr = self.trace
        for mach in tr.machines:
            if tr.held(mach) > tr.budget:
                raise BudgetExceeded(tr.round_index, mach, tr.held(mach), tr.budget)
        return tr


def _pairs(payload: tuple, skip: int = 0) -> list[Edge]:
    p = payload[skip:]
    return [(p[i], p[i + 1]) for i in range(0, len(p), 2)]


def simulate(g: Graph, k: int, m_budget: int, master_seed: int = 0
             ) -> tuple[Forest, list[RoundTrace]]:
    """Run the four rounds; raises BudgetExceeded as soon as a machine overflows."""
    n = g.n
    referee, final = n, n + 1
    traces: list[RoundTrace] = []

    def recirculate(rnd: _Round) -> None:
        for v in range(n):
            if g.degrees[v]:
                rnd.receive(v, 2 * int(g.degrees[v]))

    # round 1: vertex machines pick and ship their k-out edges
    r1 = _Round(1, m_budget)
    recirculate(r1)
    chosen = (_slot_choices(g, "k-out", k, np.uint64(master_seed & _rng.MASK64))
              if g.m else np.zeros(0, dtype=bool))
    for v in range(n):
        a, b = int(g.indptr[v]), int(g.indptr[v + 1])
        picks = [(v, int(w)) for w in g.nbrs[a:b][chosen[a:b]]]
        r1.send(v, edge_message(referee, picks, header=(v,)))
    traces.append(r1.close())

    # round 2: referee builds the k-out spanning forest
    r2 = _Round(2, m_budget)
    recirculate(r2)
    inbox = r1.outboxes.get(referee, [])
    for msg in inbox:
        r2.receive(referee, msg.words)
    sampled = [e for msg in inbox for e in _pairs(msg.payload, skip=HEADER_WORDS)]
    kforest = spanning_forest(n, sampled).sorted_edges()
    r2.send(referee, edge_message(-1, kforest))
    traces.append(r2.close())

    # round 3: broadcast of F to every vertex machine (modeled primitive)
    r3 = _Round(3, m_budget, modeled=True)
    recirculate(r3)
    for v in range(n):
        r3.receive(v, 2 * len(kforest))
        r3.send(v, edge_message(v, kforest))
    traces.append(r3.close())

    # round 4: local inter-component detection, then the final machine
    r4 = _Round(4, m_budget)
    recirculate(r4)
    labelings: dict[tuple, UnionFind] = {}
    for v in range(n):
        received = r3.outboxes[v][0].payload
        r4.receive(v, len(received))
        # each machine derives components from its own inbox only; identical
        # inboxes give identical labelings, so they are computed once
        uf = labelings.get(received)
        if uf is None:
            uf = UnionFind(n)
            for a, b in _pairs(received):
                uf.union(a, b)
            labelings[received] = uf
        label_v = uf.find(v)
        cross = [(v, int(w)) for w in g.neighbors(v) if v < w and uf.find(int(w)) != label_v]
        if cross:
            r4.send(v, edge_message(final, cross))
    r4.send(referee, edge_message(final, kforest))
    for msg in r4.outboxes.get(final, []):
        r4.receive(final, msg.words)
    collected = [e for msg in r4.outboxes.get(final, []) for e in _pairs(msg.payload)]
    out = spanning_forest(n, collected)
    r4.trace.words_out[final] = 2 * len(out)
    traces.append(r4.close())
    return out, traces


def peak_words(traces: list[RoundTrace]) -> int:
    return max((tr.held(mach) for tr in traces for mach in tr.machines), default=0)


def final_intake(traces: list[RoundTrace], n: int) -> int:
    return traces[-1].words_in.get(n + 1, 0)


def trace_csv(traces: list[RoundTrace]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["round", "machine", "words_in", "words_out", "budget", "violated", "modeled"])
    for tr in traces:
        for mach in tr.machines:
            w.writerow([tr.round_index, mach, tr.words_in.get(mach, 0),
                        tr.words_out.get(mach, 0), tr.budget,
                        int(tr.held(mach) > tr.budget), int(tr.modeled)])
    return buf.getvalue()
