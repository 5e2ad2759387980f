"""Counter-based random streams.

Every draw is a pure function of ``(master_seed, stream_index, counter)``, so a
vertex's private randomness can be evaluated for one vertex, for the whole
graph, or for a batch of trials at once and always agree bit for bit.
The mixer is the splitmix64 finalizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / float(1 << 53)


def mix64(z) -> np.ndarray:
    """splitmix64 finalizer applied elementwise to a uint64 array."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        z = z ^ (z >> np.uint64(31))
    return z


def _as_u64(x) -> np.ndarray:
    if isinstance(x, int):
        return np.uint64(x & MASK64)
    return np.asarray(x).astype(np.uint64)


def stream_keys(master_seed, stream_index) -> np.ndarray:
    """Key of stream ``stream_index`` under ``master_seed`` (both broadcast)."""
    s = _as_u64(master_seed)
    i = _as_u64(stream_index)
    with np.errstate(over="ignore"):
        return mix64(s ^ mix64((i + np.uint64(1)) * _GAMMA))


def draws(keys, counters) -> np.ndarray:
    """Raw 64-bit draws ``counter`` of the streams with the given keys."""
    k = _as_u64(keys)
    c = _as_u64(counters)
    with np.errstate(over="ignore"):
        return mix64(k + (c + np.uint64(1)) * _GAMMA)


def to_unit(raw: np.ndarray) -> np.ndarray:
    """Map raw draws to floats uniform on [0, 1)."""
    return (np.asarray(raw, dtype=np.uint64) >> np.uint64(11)).astype(np.float64) * _INV53


def trial_seed(master_seed: int, trial: int) -> int:
    """Seed of trial ``trial``: the master seed xor a hash of the trial index."""
    return int(master_seed & MASK64) ^ int(mix64(np.uint64(trial & MASK64)))


def trial_seeds(master_seed: int, trials: int, start: int = 0) -> np.ndarray:
    idx = np.arange(start, start + trials, dtype=np.uint64)
    return np.uint64(master_seed & MASK64) ^ mix64(idx)


@dataclass(frozen=True)
class RngStream:
    """A seeded family of independent streams.

    ``stream_index`` selects the default stream; samplers index streams by
    vertex so each vertex owns its randomness.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "master_seed", int(self.master_seed) & MASK64)

    @property
    def key(self) -> int:
        return int(stream_keys(self.master_seed, self.stream_index))

    def substream(self, index: int) -> "RngStream":
        return RngStream(self.master_seed, index)

    def raw(self, counters) -> np.ndarray:
        return draws(self.key, counters)

    def uniform(self, counters) -> np.ndarray:
        return to_unit(self.raw(counters))

    def for_trial(self, trial: int) -> "RngStream":
        return RngStream(trial_seed(self.master_seed, trial), self.stream_index)
