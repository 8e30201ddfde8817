"""Exhaustive classical ground truth for the toy instances.

Nothing here samples: every quantity is an exact count over all inputs (and
all keys, for cipher-level questions).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels
from .cipher import CipherSpec, FunctionView, rounds_view
from .errors import TooLarge
from .gf2 import BitVec, StructureSpace
from .qsim import fwht

STRUCTURE_LIMIT = 20
THETA_LIMIT = 18
HISTOGRAM_LIMIT = 24
SPECTRAL_THETA_MAX_M = 4


@dataclass(frozen=True)
class ThetaReport:
    theta: Fraction
    argmax_pair: tuple[BitVec, BitVec]
    e0_bound: Fraction | None = None

    def __post_init__(self):
        if not 0 <= self.theta < 1:
            raise ValueError(f"theta {self.theta} outside [0, 1)")

    @property
    def exceeds_bound(self) -> bool:
        return self.e0_bound is not None and self.theta > self.e0_bound

    def to_json(self) -> dict:
        a, b = self.argmax_pair
        return {"theta": str(self.theta), "theta_float": float(self.theta),
                "argmax": {"a": a.hex(), "b": b.hex(), "a_width": a.width, "b_width": b.width}}


@dataclass(frozen=True)
class TruncatedDiff:
    """A difference pattern over {0, 1, *}, position 1 first."""

    pattern: str

    def __post_init__(self):
        if not self.pattern or set(self.pattern) - set("01*"):
            raise ValueError(f"bad truncated difference {self.pattern!r}")

    @classmethod
    def from_masks(cls, width: int, and_mask: int, or_mask: int) -> "TruncatedDiff":
        """Bits set in every difference are 1, bits clear in every difference are 0."""
        out = []
        for i in range(width - 1, -1, -1):
            if (and_mask >> i) & 1:
                out.append("1")
            elif not (or_mask >> i) & 1:
                out.append("0")
            else:
                out.append("*")
        return cls("".join(out))

    @property
    def width(self) -> int:
        return len(self.pattern)

    def determined(self) -> list[int]:
        return [i for i, s in enumerate(self.pattern, start=1) if s != "*"]

    def contradicts(self, other: "TruncatedDiff") -> bool:
        return any(p != "*" and q != "*" and p != q for p, q in zip(self.pattern, other.pattern))

    def contradicting_bits(self, other: "TruncatedDiff") -> list[int]:
        return [i for i, (p, q) in enumerate(zip(self.pattern, other.pattern), start=1)
                if p != "*" and q != "*" and p != q]

    def __contains__(self, v: BitVec) -> bool:
        return all(s == "*" or int(s) == v[i] for i, s in enumerate(self.pattern, start=1))

    def __str__(self):
        return self.pattern


@dataclass(frozen=True)
class Prob1TruncatedDiff:
    input_diff: BitVec
    output_pattern: TruncatedDiff
    direction: str
    rounds: int

    def to_json(self) -> dict:
        return {"input": self.input_diff.hex(), "output": self.output_pattern.pattern,
                "direction": self.direction, "rounds": self.rounds}


def _table(F: FunctionView, limit: int, what: str) -> np.ndarray:
    if F.N > limit:
        raise TooLarge(what, F.N, limit)
    return F.require_table().astype(np.int64)


def brute_linear_structures(F: FunctionView) -> StructureSpace:
    """Basis of {(a, b) : F(x) ^ F(x ^ a) = b for all x}, as vectors a||b of width N+M."""
    table = _table(F, STRUCTURE_LIMIT, "linear structure scan input width")
    a, b = _kernels.linear_structure_pairs(table, F.N)
    return StructureSpace.span(F.N + F.M, [(int(x) << F.M) | int(y) for x, y in zip(a, b)])


def match_counts(F: FunctionView) -> np.ndarray:
    """Full table counts[a, b] = #{x : F(x) ^ F(x ^ a) = b}."""
    if F.N + F.M > HISTOGRAM_LIMIT:
        raise TooLarge("match table N+M", F.N + F.M, HISTOGRAM_LIMIT)
    return _kernels.difference_histograms(_table(F, HISTOGRAM_LIMIT, "match table"), F.N, F.M)


def match_fraction(F: FunctionView, a: int, b: int) -> Fraction:
    """Fraction of points x at which (a, b) makes a match."""
    table = F.require_table().astype(np.int64)
    x = np.arange(table.size)
    hits = int(np.count_nonzero((table ^ table[x ^ a]) == b))
    return Fraction(hits, table.size)


def _autocorrelations(table: np.ndarray, N: int, masks: np.ndarray) -> np.ndarray:
    """Row u: sum_x (-1)^(u . (F(x) ^ F(x ^ a))) for every a, via squared Walsh spectra."""
    bits = np.bitwise_count(table[None, :].astype(np.uint64) & masks[:, None].astype(np.uint64)) & 1
    W = fwht(1 - 2 * bits.astype(np.int64))
    return fwht(W * W) >> N


def _first_max_outside(counts: np.ndarray, size: int):
    """(best, a, b): largest count below ``size``, first in row-major (a, b) order."""
    masked = np.where(counts >= size, -1, counts)
    idx = int(np.argmax(masked))
    a, b = divmod(idx, counts.shape[1])
    best = int(masked[a, b])
    return (0, 0, 1) if best < 0 else (best, a, b)


def _report(best, a, b, N, M, e0):
    e0 = None if e0 is None else Fraction(e0)
    return ThetaReport(Fraction(int(best), 1 << N), (BitVec(N, int(a)), BitVec(M, int(b))), e0)


def brute_theta(F: FunctionView, e0=None) -> ThetaReport:
    """Largest match fraction of any pair outside the linear structure space."""
    if F.M > THETA_LIMIT:
        raise TooLarge("theta scan output width", F.M, THETA_LIMIT)
    table = _table(F, THETA_LIMIT, "theta scan input width")
    if F.M <= SPECTRAL_THETA_MAX_M:
        # counts[a, b] = 2^-M sum_u (-1)^(u.b) autocorrelation_u(a)
        auto = _autocorrelations(table, F.N, np.arange(1 << F.M))
        counts = fwht(np.ascontiguousarray(auto.T)) >> F.M
        best, a, b = _first_max_outside(counts, 1 << F.N)
    else:
        best, a, b = _kernels.theta_scan(table, F.N, F.M)
    return _report(best, a, b, F.N, F.M, e0)


def brute_component_thetas(F: FunctionView, e0=None) -> list[ThetaReport]:
    """theta of every single-bit component of ``F`` (position 1 first)."""
    table = _table(F, THETA_LIMIT, "theta scan input width")
    size = 1 << F.N
    masks = np.array([1 << (F.M - i) for i in range(1, F.M + 1)])
    auto = _autocorrelations(table, F.N, masks)
    out = []
    for row in auto:
        counts = np.stack([(size + row) >> 1, (size - row) >> 1], axis=1)
        out.append(_report(*_first_max_outside(counts, size), F.N, 1, e0))
    return out


def _check_codebook(spec: CipherSpec, limit: int, what: str):
    if spec.n + spec.m > limit:
        raise TooLarge(what, spec.n + spec.m, limit)


def brute_prob1_truncated(spec: CipherSpec, rounds: int,
                          direction: str = "forward") -> list[Prob1TruncatedDiff]:
    """Probability-1 truncated differentials, quantified over every key and input.

    ``forward`` covers the first ``rounds`` rounds; ``backward`` starts from a
    ciphertext difference and inverts the last ``rounds`` rounds.
    """
    _check_codebook(spec, 20, "truncated differential scan n+m")
    table = rounds_view(spec, rounds, direction).table.reshape(1 << spec.m, 1 << spec.n)
    table = table.astype(np.int64)
    xs = np.arange(1 << spec.n)
    full = (1 << spec.n) - 1
    out = []
    for delta in range(1, 1 << spec.n):
        diffs = table ^ table[:, xs ^ delta]
        and_mask = int(np.bitwise_and.reduce(diffs, axis=None))
        or_mask = int(np.bitwise_or.reduce(diffs, axis=None))
        if and_mask == 0 and or_mask == full:
            continue
        out.append(Prob1TruncatedDiff(BitVec(spec.n, delta),
                                      TruncatedDiff.from_masks(spec.n, and_mask, or_mask),
                                      direction, rounds))
    return out


def reachable_differences(spec: CipherSpec, delta: int) -> np.ndarray:
    """Boolean mask over output differences reached by input difference ``delta``."""
    table = _codebook(spec)
    xs = np.arange(1 << spec.n)
    counts = np.bincount((table ^ table[:, xs ^ delta]).ravel(), minlength=1 << spec.n)
    return counts > 0


@lru_cache(maxsize=8)
def _codebook(spec: CipherSpec) -> np.ndarray:
    return spec.codebook().astype(np.int64)


def brute_impossible_differentials(spec: CipherSpec) -> set[tuple[BitVec, BitVec]]:
    """Every (din, dout), both nonzero, never realized by any key and plaintext."""
    if 2 * spec.n + spec.m > 26:
        raise TooLarge("impossible differential scan 2n+m", 2 * spec.n + spec.m, 26)
    found = set()
    for din in range(1, 1 << spec.n):
        reached = reachable_differences(spec, din)
        for dout in np.flatnonzero(~reached):
            if dout:
                found.add((BitVec(spec.n, din), BitVec(spec.n, int(dout))))
    return found


@lru_cache(maxsize=8)
def _encryption_grid(spec: CipherSpec) -> np.ndarray:
    keys, xs = np.meshgrid(np.arange(1 << spec.m, dtype=np.uint64),
                           np.arange(1 << spec.n, dtype=np.uint64), indexing="ij")
    return spec.encrypt(keys, xs).astype(np.int64)


def verify_impossible(spec: CipherSpec, dx_in: int | BitVec, dx_out: int | BitVec) -> bool:
    """Scan every key and plaintext for a pair realizing ``dx_in -> dx_out``.

    Encrypts the whole (key, plaintext) grid directly rather than going through
    the keyed-view tables used elsewhere.
    """
    _check_codebook(spec, 24, "verification scan n+m")
    dx_in = dx_in.value if isinstance(dx_in, BitVec) else dx_in
    dx_out = dx_out.value if isinstance(dx_out, BitVec) else dx_out
    grid = _encryption_grid(spec)
    partner = np.arange(1 << spec.n) ^ dx_in
    return not np.any((grid ^ grid[:, partner]) == dx_out)


def contradiction_pairs(forward: list[Prob1TruncatedDiff],
                        backward: list[Prob1TruncatedDiff]) -> dict[tuple[int, int], list[int]]:
    """(dx1, dx2) -> contradicting bit positions, for every forward/backward pattern clash."""
    out = {}
    for f in forward:
        for g in backward:
            bits = f.output_pattern.contradicting_bits(g.output_pattern)
            if bits:
                out[(f.input_diff.value, g.input_diff.value)] = bits
    return out
