"""Tabulated oracles H: X -> {0,1}^n and polynomial k-wise independent families.

Domain points are integers ``0 <= x < domain_size``; range values are n-bit
integers and the group operation on the range is XOR.

k-wise independent family
-------------------------
A member is a polynomial ``f(t) = c_0 + c_1 t + ... + c_{k-1} t^{k-1}`` over
GF(2^m) with ``m = max(ceil(log2 |X|), n)``.  A domain point x is embedded as
the field element whose bit pattern is x (injective since x < 2^m) and the
output is the low n bits of ``f(x)``.  The field is GF(2)[t] / (p_m) with the
fixed irreducible polynomial ``IRREDUCIBLE_POLYS[m]`` listed below (bit i is the
coefficient of t^i).  For every m we use the irreducible trinomial
``t^m + t^k + 1`` with the smallest k, or, when no trinomial exists, the
pentanomial ``t^m + t^k3 + t^k2 + t^k1 + 1`` with lexicographically smallest
(k1, k2, k3).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

IRREDUCIBLE_POLYS: dict[int, int] = {
    1: 0x3,
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x83,
    8: 0x187,
    9: 0x203,
    10: 0x409,
    11: 0x805,
    12: 0x1009,
    13: 0x2027,
    14: 0x4021,
    15: 0x8003,
    16: 0x10047,
    17: 0x20009,
    18: 0x40009,
    19: 0x80027,
    20: 0x100009,
    21: 0x200005,
    22: 0x400003,
    23: 0x800021,
    24: 0x1000087,
    25: 0x2000009,
    26: 0x4000047,
    27: 0x8000027,
    28: 0x10000003,
    29: 0x20000005,
    30: 0x40000003,
    31: 0x80000009,
    32: 0x100400007,
}

DEFAULT_TABLE_CAP = 2**24


class CapacityError(ValueError):
    """A requested object exceeds the configured desk-scale cap."""


def table_cap() -> int:
    return int(os.environ.get("QROMLAB_TABLE_CAP", DEFAULT_TABLE_CAP))


def _check_capacity(domain_size: int, range_bits: int, cap: int | None) -> None:
    cap = table_cap() if cap is None else cap
    if domain_size * (1 << range_bits) > cap:
        raise CapacityError(
            f"|X|*2^n = {domain_size}*2^{range_bits} exceeds the table cap {cap}"
        )


@dataclass(frozen=True, eq=False)
class FiniteFunction:
    """A fully tabulated function H: {0..domain_size-1} -> {0..2^range_bits-1}."""

    domain_size: int
    range_bits: int
    table: np.ndarray

    def __post_init__(self):
        if self.domain_size < 1 or self.range_bits < 1:
            raise ValueError("domain_size and range_bits must be positive")
        table = np.asarray(self.table, dtype=np.int64)
        if table.shape != (self.domain_size,):
            raise ValueError(
                f"table has shape {table.shape}, expected ({self.domain_size},)"
            )
        if table.size and (table.min() < 0 or table.max() >= self.range_size):
            raise ValueError("table entries must lie in [0, 2^range_bits)")
        table = table.copy()
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def range_size(self) -> int:
        return 1 << self.range_bits

    def __call__(self, x: int) -> int:
        if not 0 <= x < self.domain_size:
            raise ValueError(f"domain point {x} out of range [0, {self.domain_size})")
        return int(self.table[x])

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteFunction):
            return NotImplemented
        return (
            self.domain_size == other.domain_size
            and self.range_bits == other.range_bits
            and bool(np.array_equal(self.table, other.table))
        )

    def __hash__(self) -> int:
        return hash((self.domain_size, self.range_bits, self.table.tobytes()))

    def to_json(self) -> str:
        return json.dumps(
            {
                "domain_size": self.domain_size,
                "range_bits": self.range_bits,
                "table": [int(v) for v in self.table],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> FiniteFunction:
        data = json.loads(text)
        return cls(data["domain_size"], data["range_bits"], np.array(data["table"]))


def sample_uniform(
    domain_size: int, range_bits: int, seed, cap: int | None = None
) -> FiniteFunction:
    """Uniformly random H; ``seed`` is anything accepted by ``np.random.default_rng``."""
    if domain_size < 1 or range_bits < 1:
        raise ValueError("domain_size and range_bits must be positive")
    _check_capacity(domain_size, range_bits, cap)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return FiniteFunction(
        domain_size, range_bits, rng.integers(0, 1 << range_bits, size=domain_size)
    )


def reprogram(H: FiniteFunction, x: int, theta: int) -> FiniteFunction:
    """H*theta x: equal to H except that x maps to theta."""
    if not 0 <= x < H.domain_size:
        raise ValueError(f"domain point {x} out of range")
    if not 0 <= theta < H.range_size:
        raise ValueError(f"range value {theta} out of range")
    table = H.table.copy()
    table[x] = theta
    return FiniteFunction(H.domain_size, H.range_bits, table)


def all_functions(domain_size: int, range_bits: int) -> Iterator[FiniteFunction]:
    """Every H: X -> Y, in lexicographic order of tables."""
    size = 1 << range_bits
    if size**domain_size > 2**20:
        raise CapacityError("too many functions to enumerate")
    for idx in range(size**domain_size):
        table = []
        for _ in range(domain_size):
            idx, v = divmod(idx, size)
            table.append(v)
        yield FiniteFunction(domain_size, range_bits, np.array(table[::-1]))


# -- GF(2^m) ------------------------------------------------------------------


def gf_mul(a: int, b: int, m: int) -> int:
    """Product in GF(2^m) modulo IRREDUCIBLE_POLYS[m]."""
    poly = IRREDUCIBLE_POLYS[m]
    top = 1 << m
    res = 0
    while b:
        if b & 1:
            res ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return res


def field_bits(domain_size: int, range_bits: int) -> int:
    return max((domain_size - 1).bit_length(), range_bits, 1)


@dataclass(frozen=True)
class KWiseFamilyMember:
    """One polynomial of degree < k over GF(2^m), read as a function X -> {0,1}^n."""

    k: int
    coefficients: tuple[int, ...]
    domain_size: int
    range_bits: int
    m: int = field(default=0)

    def __post_init__(self):
        if self.k < 1 or len(self.coefficients) != self.k:
            raise ValueError("need exactly k >= 1 coefficients")
        m = self.m or field_bits(self.domain_size, self.range_bits)
        if m < field_bits(self.domain_size, self.range_bits):
            raise ValueError("field too small for the domain/range")
        if m not in IRREDUCIBLE_POLYS:
            raise CapacityError(f"no irreducible polynomial tabulated for m={m}")
        if any(not 0 <= c < (1 << m) for c in self.coefficients):
            raise ValueError("coefficient outside GF(2^m)")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))

    @property
    def range_size(self) -> int:
        return 1 << self.range_bits

    def __call__(self, x: int) -> int:
        return evaluate_kwise(self, x)


def evaluate_kwise(f: KWiseFamilyMember, x: int) -> int:
    if not 0 <= x < f.domain_size:
        raise ValueError(f"domain point {x} out of range [0, {f.domain_size})")
    acc = 0
    for c in reversed(f.coefficients):
        acc = gf_mul(acc, x, f.m) ^ c
    return acc & ((1 << f.range_bits) - 1)


def materialize(f: KWiseFamilyMember, cap: int | None = None) -> FiniteFunction:
    _check_capacity(f.domain_size, f.range_bits, cap)
    table = np.fromiter(
        (evaluate_kwise(f, x) for x in range(f.domain_size)),
        dtype=np.int64,
        count=f.domain_size,
    )
    return FiniteFunction(f.domain_size, f.range_bits, table)


def sample_kwise(k: int, domain_size: int, range_bits: int, seed) -> KWiseFamilyMember:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    m = field_bits(domain_size, range_bits)
    coeffs = tuple(int(c) for c in rng.integers(0, 1 << m, size=k))
    return KWiseFamilyMember(k, coeffs, domain_size, range_bits, m)


def kwise_family(k: int, domain_size: int, range_bits: int) -> Iterator[KWiseFamilyMember]:
    """All (2^m)^k members of the family, for exhaustive checks."""
    m = field_bits(domain_size, range_bits)
    size = 1 << m
    if size**k > 2**20:
        raise CapacityError("family too large to enumerate")
    for idx in range(size**k):
        coeffs = []
        for _ in range(k):
            idx, c = divmod(idx, size)
            coeffs.append(c)
        yield KWiseFamilyMember(k, tuple(coeffs), domain_size, range_bits, m)
