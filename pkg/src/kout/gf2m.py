"""Arithmetic in GF(2^m), 3 <= m <= 24.

Elements are m-bit integers in the polynomial basis. Fields up to
``TABLE_MAX_M`` use log/antilog tables (numpy, vectorized); larger ones fall
back to carry-less multiply with reduction.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

# x^m + ... + 1, bit i = coefficient of x^i
PRIMITIVE_POLYS: dict[int, int] = {
    3: 0b1011,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x89,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
    17: 0x20009,
    18: 0x40081,
    19: 0x80027,
    20: 0x100009,
    21: 0x200005,
    22: 0x400003,
    23: 0x800021,
    24: 0x1000087,
}

TABLE_MAX_M = 20


def clmul_mod(a: int, b: int, m: int, poly: int) -> int:
    """Carry-less product of a and b reduced modulo ``poly``."""
    r = 0
    top = 1 << m
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return r


class GF2m:
    def __init__(self, m: int, poly: int | None = None):
        if m not in PRIMITIVE_POLYS and poly is None:
            raise ValueError(f"no primitive polynomial tabulated for m={m}")
        self.m = m
        self.poly = PRIMITIVE_POLYS[m] if poly is None else poly
        self.order = (1 << m) - 1
        self.tabled = m <= TABLE_MAX_M
        if self.tabled:
            exp = np.zeros(2 * self.order, dtype=np.int64)
            log = np.full(1 << m, -1, dtype=np.int64)
            x = 1
            for i in range(self.order):
                exp[i] = x
                log[x] = i
                x <<= 1
                if x >> m:
                    x ^= self.poly
            exp[self.order:] = exp[:self.order]
            self.exp = exp
            self.log = log
            self._exp_list = exp[:self.order].tolist()
            self._log_list = log.tolist()

    # scalar operations -------------------------------------------------

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self.tabled:
            return self._exp_list[(self._log_list[a] + self._log_list[b]) % self.order]
        return clmul_mod(a, b, self.m, self.poly)

    def alpha_pow(self, e: int) -> int:
        e %= self.order
        if self.tabled:
            return self._exp_list[e]
        result, base = 1, 2
        while e:
            if e & 1:
                result = clmul_mod(result, base, self.m, self.poly)
            base = clmul_mod(base, base, self.m, self.poly)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in GF(2^m)")
        if self.tabled:
            return self._exp_list[(-self._log_list[a]) % self.order]
        return self.pow(a, self.order - 1)

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e else 1
        if self.tabled:
            return self._exp_list[(self._log_list[a] * e) % self.order]
        result = 1
        while e:
            if e & 1:
                result = clmul_mod(result, a, self.m, self.poly)
            a = clmul_mod(a, a, self.m, self.poly)
            e >>= 1
        return result

    def discrete_log(self, a: int) -> int:
        if self.tabled:
            return self._log_list[a]
        if not 0 < a < (1 << self.m):
            raise ValueError("not a nonzero field element")
        # baby-step giant-step
        step = math.isqrt(self.order) + 1
        baby = {}
        x = 1
        for j in range(step):
            baby.setdefault(x, j)
            x = clmul_mod(x, 2, self.m, self.poly)
        giant = self.inv(x)
        y = a
        for i in range(step):
            j = baby.get(y)
            if j is not None:
                return (i * step + j) % self.order
            y = clmul_mod(y, giant, self.m, self.poly)
        raise ValueError("not a field element")

    # vectorized --------------------------------------------------------

    def alpha_pow_array(self, e: np.ndarray) -> np.ndarray:
        e = np.asarray(e, dtype=np.int64) % self.order
        if self.tabled:
            return self.exp[e]
        flat = [self.alpha_pow(int(x)) for x in e.ravel()]
        return np.array(flat, dtype=np.int64).reshape(e.shape)


@lru_cache(maxsize=None)
def field(m: int) -> GF2m:
    return GF2m(m)
