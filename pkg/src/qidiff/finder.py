"""Structure recovery and the two miss-in-the-middle searches built on it.

``find_struct`` collects c(N+M) subroutine samples for a view and returns the
solution space of gamma . v = 0, which always contains the true linear
structure space. ``find_impo_diff`` runs it on the keyed round prefix and the
inverted round suffix at every split, keeps zero-key-difference solutions and
pairs forward and backward differentials whose middle differences disagree.
``find_impo_diff2`` does the same one output bit at a time.
"""
from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import oracle
from .cipher import CipherSpec, FunctionView, component_view, rounds_view
from .errors import BadParams, BadSplit
from .gf2 import (DEFAULT_CAP, BitVec, GF2Matrix, StructureSpace, constrain_prefix_zero,
                  iter_elements, solve_nullspace)
from .qsim import BACKENDS, GateTally, SimonSample, collect_samples, derive_seed

log = logging.getLogger(__name__)

DEFAULT_C = 4
_ALGO_CODE = {"full": 0, "truncated": 1}
_DIR_CODE = {"forward": 0, "backward": 1}


@dataclass
class SearchParams:
    c: int = DEFAULT_C
    e0: Fraction | None = None
    backend: str = "fourier"
    seed: int = 0
    enumeration_cap: int = DEFAULT_CAP
    verify_with_oracle: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.c < 1:
            raise BadParams("c must be a positive integer")
        if self.backend not in BACKENDS:
            raise BadParams(f"backend must be one of {BACKENDS}")
        if self.enumeration_cap < 1:
            raise BadParams("enumeration cap must be positive")
        if self.workers < 1:
            raise BadParams("workers must be positive")
        if self.e0 is not None:
            self.e0 = Fraction(self.e0).limit_denominator(1 << 32)
            if not 0 <= self.e0 < 1:
                raise BadParams("e0 must lie in [0, 1)")

    def warnings(self) -> list[str]:
        if self.e0 is None:
            return ["no e0 given: the correctness bounds assume theta <= e0 < 1 for every view"]
        if self.c <= 3 / (1 - self.e0):
            return [f"c = {self.c} does not exceed 3/(1-e0) = {float(3 / (1 - self.e0)):.3f}"]
        return []

    def to_json(self) -> dict:
        return {"c": self.c, "e0": None if self.e0 is None else str(self.e0),
                "backend": self.backend, "seed": self.seed,
                "enumeration_cap": self.enumeration_cap,
                "verify_with_oracle": self.verify_with_oracle}


def struct_failure_bound(c: int, e0, width: int) -> float:
    """Upper bound on Pr[L != L_F] for one structure search over F_2^width."""
    return min(1.0, (2 * ((1 + float(e0)) / 2) ** c) ** width)


def record_confidence(algorithm: str, c: int, e0, n: int, m: int) -> float:
    """Lower bound on the probability that one emitted pair is impossible."""
    width = 2 * n + m if algorithm == "full" else m + n + 1
    return max(0.0, 1 - 2 * struct_failure_bound(c, e0, width))


@dataclass
class StructResult:
    space: StructureSpace
    samples_used: int
    gammas: list[SimonSample]
    tally: GateTally


def find_struct(F: FunctionView, params: SearchParams, path: tuple[int, ...] = ()) -> StructResult:
    """Solution space of gamma_i . (a, b) = 0 over c(N+M) subroutine samples.

    Sample i is drawn from its own generator seeded by ``(params.seed, *path, i)``.
    """
    count = params.c * (F.N + F.M)
    seeds = [derive_seed(params.seed, *path, i) for i in range(count)]
    samples, tally = collect_samples(F, seeds, params.backend)
    rows = GF2Matrix(F.N + F.M, tuple(s.gamma.value for s in samples))
    return StructResult(solve_nullspace(rows), count, samples, tally)


@dataclass
class Witness:
    split_r1: int
    bit_index: int | None
    dy1: BitVec
    dy2: BitVec

    def to_json(self) -> dict:
        return {"split_r1": self.split_r1, "bit_index": self.bit_index,
                "dy1": self.dy1.hex(), "dy2": self.dy2.hex()}


@dataclass
class ImpossibleDifferentialRecord:
    dx1: BitVec
    dx2: BitVec
    algorithm: str
    witnesses: list[Witness] = field(default_factory=list)
    verified: str = "unknown"
    confidence: float | None = None

    def __post_init__(self):
        if not self.dx1 or not self.dx2:
            raise ValueError("impossible differential with a zero difference")

    @property
    def split_r1(self) -> int:
        return self.witnesses[0].split_r1

    @property
    def bit_index(self) -> int | None:
        return self.witnesses[0].bit_index

    @property
    def dy1(self) -> BitVec:
        return self.witnesses[0].dy1

    @property
    def dy2(self) -> BitVec:
        return self.witnesses[0].dy2

    @property
    def pair(self) -> tuple[int, int]:
        return self.dx1.value, self.dx2.value

    def to_json(self) -> dict:
        return {"dx1": self.dx1.hex(), "dx2": self.dx2.hex(), "algorithm": self.algorithm,
                "verified": self.verified, "confidence": self.confidence,
                "witnesses": [w.to_json() for w in self.witnesses]}


@dataclass
class UnitReport:
    """One structure search: a split, a direction and (for the truncated search) a bit."""

    split_r1: int
    direction: str
    bit_index: int | None
    view: str
    struct: StructResult
    constrained: StructureSpace
    elements_scanned: int
    truncated: bool

    def to_json(self) -> dict:
        return {"split_r1": self.split_r1, "direction": self.direction,
                "bit_index": self.bit_index, "view": self.view,
                "samples": self.struct.samples_used, "space_dim": self.struct.space.dim,
                "zero_key_dim": self.constrained.dim,
                "elements_scanned": self.elements_scanned, "truncated": self.truncated}


@dataclass
class SearchResult:
    algorithm: str
    cipher: CipherSpec
    params: SearchParams
    records: list[ImpossibleDifferentialRecord]
    units: list[UnitReport]
    warnings: list[str]
    tally: GateTally

    def pairs(self) -> set[tuple[int, int]]:
        return {r.pair for r in self.records}

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def to_json(self) -> dict:
        counts = {s: sum(r.verified == s for r in self.records)
                  for s in ("oracle_confirmed", "oracle_refuted", "unknown")}
        return {"algorithm": self.algorithm, "cipher": self.cipher.to_json(),
                "params": self.params.to_json(), "warnings": self.warnings,
                "units": [u.to_json() for u in self.units],
                "tally": self.tally.to_json(), "verification": counts,
                "records": [r.to_json() for r in self.records]}


@lru_cache(maxsize=32)
def _cached_view(spec: CipherSpec, rounds: int, direction: str) -> FunctionView:
    return rounds_view(spec, rounds, direction)


@lru_cache(maxsize=512)
def _cached_component(spec: CipherSpec, rounds: int, direction: str, i: int) -> FunctionView:
    return component_view(_cached_view(spec, rounds, direction), i)


def _unit_view(spec, r1, direction, bit):
    rounds = r1 if direction == "forward" else spec.r - r1
    if bit is None:
        return _cached_view(spec, rounds, direction)
    return _cached_component(spec, rounds, direction, bit)


def _run_unit(spec: CipherSpec, params: SearchParams, algorithm: str,
              r1: int, direction: str, bit: int | None):
    view = _unit_view(spec, r1, direction, bit)
    path = (_ALGO_CODE[algorithm], r1, _DIR_CODE[direction], bit or 0)
    struct = find_struct(view, params, path)
    constrained = constrain_prefix_zero(struct.space, spec.m)
    limit = params.enumeration_cap
    truncated = constrained.dim >= 63 or (1 << constrained.dim) > limit
    elements = iter_elements(constrained, limit)
    unit = UnitReport(r1, direction, bit, view.name, struct, constrained, int(elements.size), truncated)
    return unit, _differentials(elements, spec.n, view.M)


def _differentials(elements: np.ndarray, n: int, M: int) -> dict[int, list[int]]:
    """dx -> sorted output differences, from zero-key solutions (0, dx, dy) with dx != 0."""
    out: dict[int, set[int]] = {}
    mmask, nmask = (1 << M) - 1, (1 << n) - 1
    for e in elements.tolist():
        dx = (e >> M) & nmask
        if dx:
            out.setdefault(dx, set()).add(e & mmask)
    return {dx: sorted(dys) for dx, dys in out.items()}


def _pair_split(forward: dict[int, list[int]], backward: dict[int, list[int]]):
    """(dx1, dx2, dy1, dy2) for every pair admitting dy1 != dy2; first such witness."""
    for dx1, ys1 in forward.items():
        for dx2, ys2 in backward.items():
            if len(ys1) == 1 and ys1 == ys2:
                continue
            for dy1 in ys1:
                dy2 = next((d for d in ys2 if d != dy1), None)
                if dy2 is not None:
                    yield dx1, dx2, dy1, dy2
                    break


def _search(spec: CipherSpec, params: SearchParams, algorithm: str) -> SearchResult:
    if spec.r < 2:
        raise BadSplit(1, spec.r)
    bits = [None] if algorithm == "full" else list(range(1, spec.n + 1))
    jobs = [(r1, d, b) for r1 in range(1, spec.r) for b in bits for d in ("forward", "backward")]

    def run(job):
        return _run_unit(spec, params, algorithm, *job)

    if params.workers > 1:
        with ThreadPoolExecutor(max_workers=params.workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    units = [u for u, _ in results]
    diffs = {job: d for job, (_, d) in zip(jobs, results)}
    msgs = params.warnings()
    for u in units:
        if u.truncated:
            msgs.append(f"split {u.split_r1} {u.direction} bit {u.bit_index}: solution space of "
                        f"dimension {u.constrained.dim} truncated to {u.elements_scanned} elements")
    conf = None
    if params.e0 is not None:
        conf = record_confidence(algorithm, params.c, params.e0, spec.n, spec.m)

    merged: dict[tuple[int, int], ImpossibleDifferentialRecord] = {}
    M = spec.n if algorithm == "full" else 1
    for r1 in range(1, spec.r):
        for b in bits:
            fwd, bwd = diffs[(r1, "forward", b)], diffs[(r1, "backward", b)]
            for dx1, dx2, dy1, dy2 in _pair_split(fwd, bwd):
                rec = merged.get((dx1, dx2))
                if rec is None:
                    rec = merged[(dx1, dx2)] = ImpossibleDifferentialRecord(
                        BitVec(spec.n, dx1), BitVec(spec.n, dx2), algorithm, confidence=conf)
                rec.witnesses.append(Witness(r1, b, BitVec(M, dy1), BitVec(M, dy2)))

    records = [merged[k] for k in sorted(merged)]
    if params.verify_with_oracle:
        for rec in records:
            ok = oracle.verify_impossible(spec, rec.dx1, rec.dx2)
            rec.verified = "oracle_confirmed" if ok else "oracle_refuted"
        refuted = sum(r.verified == "oracle_refuted" for r in records)
        if refuted:
            log.warning("%d of %d records refuted by exhaustive scan", refuted, len(records))
    for msg in msgs:
        warnings.warn(msg, stacklevel=3)
    tally = sum((u.struct.tally for u in units), GateTally())
    return SearchResult(algorithm, spec, params, records, units, msgs, tally)


def find_impo_diff(spec: CipherSpec, params: SearchParams) -> SearchResult:
    """Impossible differentials from full probability-1 differentials meeting in the middle."""
    return _search(spec, params, "full")


def find_impo_diff2(spec: CipherSpec, params: SearchParams) -> SearchResult:
    """Impossible differentials from single-bit contradictions of truncated differentials."""
    return _search(spec, params, "truncated")


def recommended_c(theta) -> int:
    """Smallest integer c with c > 3 / (1 - theta)."""
    bound = Fraction(3) / (1 - Fraction(theta))
    return math.floor(bound) + 1
