"""Bit-exact linear algebra over GF(2).

Vectors are packed into Python ints. Position 1 is the leftmost symbol of a
tuple ``(v_1, ..., v_w)`` and maps to the most significant bit, so the hex
form of a vector reads in the same order as the tuple.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import SpaceTooLarge

DEFAULT_CAP = 1 << 20
MAX_WIDTH = 4096


def parity(v: int) -> int:
    return v.bit_count() & 1


def _mask(width: int) -> int:
    return (1 << width) - 1


@dataclass(frozen=True, order=True)
class BitVec:
    width: int
    value: int

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise ValueError(f"width {self.width} outside 1..{MAX_WIDTH}")
        if self.value < 0 or self.value >> self.width:
            raise ValueError(f"value {self.value:#x} does not fit in {self.width} bits")

    @classmethod
    def from_bits(cls, bits: str | Sequence[int]) -> "BitVec":
        bits = [int(b) for b in bits]
        value = 0
        for b in bits:
            value = (value << 1) | (b & 1)
        return cls(len(bits), value)

    @classmethod
    def from_hex(cls, text: str, width: int) -> "BitVec":
        return cls(width, int(text, 16) if text else 0)

    @classmethod
    def zero(cls, width: int) -> "BitVec":
        return cls(width, 0)

    @classmethod
    def unit(cls, width: int, i: int) -> "BitVec":
        """The vector with a single 1 at position ``i`` (1-based, from the left)."""
        return cls(width, 1 << (width - i))

    def __getitem__(self, i: int) -> int:
        if not 1 <= i <= self.width:
            raise IndexError(i)
        return (self.value >> (self.width - i)) & 1

    def __xor__(self, other: "BitVec") -> "BitVec":
        if other.width != self.width:
            raise ValueError("width mismatch")
        return BitVec(self.width, self.value ^ other.value)

    def __bool__(self):
        return self.value != 0

    def dot(self, other: "BitVec") -> int:
        if other.width != self.width:
            raise ValueError(f"dot of widths {self.width} and {other.width}")
        return parity(self.value & other.value)

    def concat(self, *others: "BitVec") -> "BitVec":
        width, value = self.width, self.value
        for o in others:
            width += o.width
            value = (value << o.width) | o.value
        return BitVec(width, value)

    def slice(self, start: int, stop: int) -> "BitVec":
        """Positions ``start..stop`` inclusive, 1-based."""
        w = stop - start + 1
        return BitVec(w, (self.value >> (self.width - stop)) & _mask(w))

    def bits(self) -> str:
        return format(self.value, f"0{self.width}b")

    def hex(self) -> str:
        return format(self.value, f"0{(self.width + 3) // 4}x")

    def __str__(self):
        return self.bits()


@dataclass(frozen=True)
class GF2Matrix:
    width: int
    rows: tuple[int, ...] = ()

    def __post_init__(self):
        for r in self.rows:
            if r < 0 or r >> self.width:
                raise ValueError(f"row {r:#x} wider than {self.width}")

    @classmethod
    def from_vectors(cls, width: int, vectors: Iterable[BitVec | int | str]) -> "GF2Matrix":
        rows = []
        for v in vectors:
            if isinstance(v, str):
                v = BitVec.from_bits(v)
            if isinstance(v, BitVec):
                if v.width != width:
                    raise ValueError("row width mismatch")
                v = v.value
            rows.append(int(v))
        return cls(width, tuple(rows))

    def vectors(self) -> list[BitVec]:
        return [BitVec(self.width, r) for r in self.rows]

    def rank(self) -> int:
        return len(rref(self.rows, self.width))


def rref(rows: Iterable[int], width: int) -> list[int]:
    """Reduced row-echelon form; zero rows dropped, pivots ordered left to right."""
    pivots: dict[int, int] = {}  # pivot bit -> row
    for r in rows:
        for bit, prow in pivots.items():
            if (r >> bit) & 1:
                r ^= prow
        if not r:
            continue
        top = r.bit_length() - 1
        for bit in pivots:
            if (pivots[bit] >> top) & 1:
                pivots[bit] ^= r
        pivots[top] = r
    return [pivots[b] for b in sorted(pivots, reverse=True)]


@dataclass(frozen=True)
class StructureSpace:
    """A linear subspace of F_2^ambient_width given by an independent basis."""

    ambient_width: int
    basis: tuple[int, ...] = ()

    def __post_init__(self):
        if len(rref(self.basis, self.ambient_width)) != len(self.basis):
            raise ValueError("basis vectors are linearly dependent")

    @classmethod
    def full(cls, width: int) -> "StructureSpace":
        return cls(width, tuple(1 << (width - i) for i in range(1, width + 1)))

    @classmethod
    def span(cls, width: int, vectors: Iterable[BitVec | int | str]) -> "StructureSpace":
        m = GF2Matrix.from_vectors(width, vectors)
        return cls(width, tuple(rref(m.rows, width)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def vectors(self) -> list[BitVec]:
        return [BitVec(self.ambient_width, b) for b in self.basis]

    def __contains__(self, v: BitVec | int) -> bool:
        if isinstance(v, BitVec):
            v = v.value
        reduced = rref(self.basis, self.ambient_width)
        for row in reduced:
            if (v >> (row.bit_length() - 1)) & 1:
                v ^= row
        return v == 0

    def issubspace(self, other: "StructureSpace") -> bool:
        return all(b in other for b in self.basis)

    def canonical(self) -> "StructureSpace":
        return StructureSpace(self.ambient_width, tuple(rref(self.basis, self.ambient_width)))

    def __eq__(self, other):
        if not isinstance(other, StructureSpace):
            return NotImplemented
        return (self.ambient_width == other.ambient_width
                and rref(self.basis, self.ambient_width) == rref(other.basis, other.ambient_width))

    def __hash__(self):
        return hash((self.ambient_width, tuple(rref(self.basis, self.ambient_width))))

    def to_json(self) -> dict:
        digits = (self.ambient_width + 3) // 4
        return {"width": self.ambient_width,
                "basis": [format(b, f"0{digits}x") for b in self.basis]}

    @classmethod
    def from_json(cls, data: dict) -> "StructureSpace":
        return cls(data["width"], tuple(int(h, 16) for h in data["basis"]))


def solve_nullspace(rows: GF2Matrix) -> StructureSpace:
    """Basis (in RREF) of all v with r.v = 0 for every row r."""
    w = rows.width
    reduced = rref(rows.rows, w)
    pivot_bits = [r.bit_length() - 1 for r in reduced]
    pivot_set = set(pivot_bits)
    basis = []
    for free in range(w - 1, -1, -1):
        if free in pivot_set:
            continue
        v = 1 << free
        for r, pb in zip(reduced, pivot_bits):
            if (r >> free) & 1:
                v |= 1 << pb
        basis.append(v)
    return StructureSpace(w, tuple(rref(basis, w)))


def constrain_prefix_zero(space: StructureSpace, m: int) -> StructureSpace:
    """Intersect ``space`` with the vectors whose first ``m`` positions are 0."""
    w = space.ambient_width
    if not 0 <= m <= w:
        raise ValueError(f"prefix length {m} outside 0..{w}")
    if m == 0:
        return space.canonical()
    # Eliminate the prefix columns: RREF pivots in the prefix carry them, the
    # remaining rows already have a zero prefix.
    suffix_bits = w - m
    reduced = rref(space.basis, w)
    kept = [r for r in reduced if r.bit_length() <= suffix_bits]
    return StructureSpace(w, tuple(kept))


def iter_elements(space: StructureSpace, limit: int | None = None) -> np.ndarray:
    """Elements in reflected Gray-code order, optionally truncated.

    Gray-code bit j toggles the j-th vector from the end of the reduced
    row-echelon basis, so the order does not depend on how the space was built.
    Returned as an object array when the width exceeds 63 bits.
    """
    count = 1 << space.dim
    ordered = rref(space.basis, space.ambient_width)[::-1]
    if limit is not None:
        count = min(count, limit)
    if space.ambient_width <= 63:
        out = np.zeros(1, dtype=np.uint64)
        basis = [np.uint64(b) for b in ordered]
    else:
        out = np.array([0], dtype=object)
        basis = ordered
    for b in basis:
        if out.size >= count:
            break
        out = np.concatenate([out, out[::-1] ^ b])
    return out[:count]


def enumerate_space(space: StructureSpace, cap: int = DEFAULT_CAP) -> list[BitVec]:
    if cap < 1:
        raise ValueError("cap must be positive")
    if space.dim >= 63 or (1 << space.dim) > cap:
        raise SpaceTooLarge(space.dim, cap)
    return [BitVec(space.ambient_width, int(e)) for e in iter_elements(space)]
