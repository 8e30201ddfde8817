"""Exact classical simulation of the structure-finding subroutine.

One run prepares ``|x>|y>|0>`` in uniform superposition over (x, y), writes
``F(x) xor y`` into the last register (one oracle call plus M CNOTs),
measures that register, applies Hadamards to the first two registers and
measures them, yielding ``gamma = (gamma1, gamma2)``.

Two backends produce gamma with the same law:

* ``fourier``: the outcome of the last-register measurement does not change
  the law of gamma, so gamma2 is uniform and, given gamma2, gamma1 is drawn
  with probability W(gamma1)^2 / 4^N where W is the Walsh spectrum of
  ``x -> gamma2 . F(x)``. Sampling is exact in integer arithmetic.
* ``statevector``: the literal register-level circuit on 2^(N+2M) amplitudes.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cipher import FunctionView
from .errors import TooLarge
from .gf2 import BitVec

FOURIER_LIMIT = 24
STATEVECTOR_LIMIT = 22
TABLE_ENTRIES_LIMIT = 24  # log2 of cached Walsh coefficients per view
BACKENDS = ("fourier", "statevector")


def derive_seed(root: int, *path: int) -> int:
    """Independent 64-bit seed for the work unit addressed by ``path``."""
    ss = np.random.SeedSequence(root, spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis."""
    a = np.array(values, copy=True)
    n = a.shape[-1]
    lead = a.shape[:-1]
    h = 1
    while h < n:
        a = a.reshape(*lead, -1, 2, h)
        x = a[..., 0, :].copy()
        a[..., 0, :] += a[..., 1, :]
        a[..., 1, :] = x - a[..., 1, :]
        h *= 2
    return a.reshape(*lead, n)


def walsh_spectrum(f) -> np.ndarray:
    """Entry g is sum_x (-1)^(x.g xor f(x)) for a Boolean function f."""
    if isinstance(f, FunctionView):
        if f.M != 1:
            raise ValueError("walsh_spectrum needs a single-bit view")
        if f.N > FOURIER_LIMIT:
            raise TooLarge("walsh spectrum input width", f.N, FOURIER_LIMIT)
        f = f.require_table()
    f = np.asarray(f, dtype=np.int64)
    return fwht(1 - 2 * (f & 1))


def _signs(table: np.ndarray, masks: np.ndarray) -> np.ndarray:
    bits = np.bitwise_count(table[None, :] & masks[:, None].astype(table.dtype)) & 1
    return (1 - 2 * bits.astype(np.int32)).astype(np.int32)


class _Spectra:
    """Walsh spectra of every mask function gamma2 . F, cached per view."""

    def __init__(self, view: FunctionView):
        if view.N > FOURIER_LIMIT:
            raise TooLarge("Fourier sampler input width", view.N, FOURIER_LIMIT)
        self.table = view.require_table()
        self.N, self.M = view.N, view.M
        self.full = None
        self.rows: dict[int, np.ndarray] = {}
        if self.N + self.M <= TABLE_ENTRIES_LIMIT:
            self.full = fwht(_signs(self.table, np.arange(1 << self.M, dtype=np.uint64)))

    def row(self, g2: int) -> np.ndarray:
        if self.full is not None:
            return self.full[g2]
        if g2 not in self.rows:
            self.rows[g2] = fwht(_signs(self.table, np.array([g2], dtype=np.uint64)))[0]
        return self.rows[g2]

    def cumulative(self, g2: int) -> np.ndarray:
        w = self.row(g2).astype(np.int64)
        return np.cumsum(w * w)


_spectra_cache: "weakref.WeakKeyDictionary[FunctionView, _Spectra]" = weakref.WeakKeyDictionary()


def _spectra(view: FunctionView) -> _Spectra:
    s = _spectra_cache.get(view)
    if s is None:
        s = _spectra_cache[view] = _Spectra(view)
    return s


@dataclass
class GateTally:
    """Gates spent by subroutine runs; oracle calls in units of the full cipher circuit."""

    runs: int = 0
    hadamard: int = 0
    cnot: int = 0
    ue_calls: Fraction = Fraction(0)

    def __add__(self, other: "GateTally") -> "GateTally":
        return GateTally(self.runs + other.runs, self.hadamard + other.hadamard,
                         self.cnot + other.cnot, self.ue_calls + other.ue_calls)

    @classmethod
    def for_runs(cls, view: FunctionView, runs: int) -> "GateTally":
        """What ``runs`` executions of the circuit spend on ``view``."""
        return cls(runs, runs * 2 * (view.N + view.M), runs * view.M, runs * view.cost)

    def to_json(self) -> dict:
        return {"runs": self.runs, "hadamard": self.hadamard, "cnot": self.cnot,
                "ue_calls": str(self.ue_calls)}


@dataclass(frozen=True)
class SimonSample:
    gamma: BitVec
    N: int
    backend: str
    seed: int | None = None

    @property
    def gamma1(self) -> BitVec:
        return self.gamma.slice(1, self.N)

    @property
    def gamma2(self) -> BitVec:
        return self.gamma.slice(self.N + 1, self.gamma.width)


@dataclass
class DistributionTable:
    """Law of gamma, index ``gamma1 * 2^M + gamma2``, as integer weights over 2^log2_total."""

    N: int
    M: int
    weights: np.ndarray
    log2_total: int

    @property
    def pmf(self) -> np.ndarray:
        return self.weights / float(2 ** self.log2_total)

    def probability(self, gamma: int) -> Fraction:
        return Fraction(int(self.weights[gamma]), 2 ** self.log2_total)

    def orthogonal_mass(self) -> np.ndarray:
        """Pr[gamma . v = 0] for every v = (a, b), as exact integers over 2^(log2_total+1)."""
        total = 1 << self.log2_total
        return total + fwht(self.weights.astype(np.int64))

    def to_json(self) -> dict:
        digits = (self.N + self.M + 3) // 4
        return {format(int(g), f"0{digits}x"): float(self.pmf[g])
                for g in np.flatnonzero(self.weights)}


def _check_fourier(view: FunctionView):
    if view.N > FOURIER_LIMIT:
        raise TooLarge("Fourier sampler input width", view.N, FOURIER_LIMIT)


def exact_distribution(F: FunctionView) -> DistributionTable:
    if F.N + F.M > FOURIER_LIMIT:
        raise TooLarge("exact distribution N+M", F.N + F.M, FOURIER_LIMIT)
    spectra = _spectra(F)
    w = np.stack([spectra.row(g2) for g2 in range(1 << F.M)]).astype(np.int64)
    weights = (w * w).T.reshape(-1)
    return DistributionTable(F.N, F.M, weights, 2 * F.N + F.M)


def simon_sample_fourier(F: FunctionView, rng) -> SimonSample:
    return fourier_samples(F, [rng])[0]


def fourier_samples(F: FunctionView, seeds) -> list[SimonSample]:
    """One sample per seed; each draw uses only its own generator."""
    _check_fourier(F)
    spectra = _spectra(F)
    rngs = [make_rng(s) for s in seeds]
    g2s = [int(r.integers(0, 1 << F.M)) for r in rngs]
    out: list[SimonSample | None] = [None] * len(rngs)
    by_mask: dict[int, list[int]] = {}
    for idx, g2 in enumerate(g2s):
        by_mask.setdefault(g2, []).append(idx)
    bound = 1 << (2 * F.N)
    for g2, members in by_mask.items():
        cum = spectra.cumulative(g2)
        for idx in members:
            u = int(rngs[idx].integers(0, bound))
            g1 = int(np.searchsorted(cum, u, side="right"))
            seed = seeds[idx] if isinstance(seeds[idx], (int, np.integer)) else None
            out[idx] = SimonSample(BitVec(F.N + F.M, (g1 << F.M) | g2), F.N, "fourier",
                                   None if seed is None else int(seed))
    return out


def _hadamard(state: np.ndarray, qubit: int, total: int) -> np.ndarray:
    s = state.reshape(1 << qubit, 2, 1 << (total - qubit - 1))
    a0, a1 = s[:, 0, :].copy(), s[:, 1, :].copy()
    s[:, 0, :] = (a0 + a1) * np.sqrt(0.5)
    s[:, 1, :] = (a0 - a1) * np.sqrt(0.5)
    return s.reshape(-1)


@dataclass
class StatevectorSimulator:
    """Register-level simulation of the circuit on |x>|y>|z> (qubit 0 = leftmost bit of x)."""

    F: FunctionView
    tally: GateTally = field(default_factory=GateTally)

    def __post_init__(self):
        F = self.F
        self.width = F.N + 2 * F.M
        if self.width > STATEVECTOR_LIMIT:
            raise TooLarge("statevector qubits N+2M", self.width, STATEVECTOR_LIMIT)
        self.table = F.require_table().astype(np.int64)
        self._psi3 = None
        self._prep = GateTally()

    def _prepare(self) -> np.ndarray:
        """|Psi3>: Hadamards on x and y, the oracle into z, then z ^= y by CNOTs."""
        if self._psi3 is not None:
            return self._psi3
        N, M, total = self.F.N, self.F.M, self.width
        tally = GateTally()
        state = np.zeros(1 << total)
        state[0] = 1.0
        for q in range(N + M):
            state = _hadamard(state, q, total)
            tally.hadamard += 1
        idx = np.arange(1 << total)
        # oracle call: |x>|y>|z> -> |x>|y>|z xor F(x)>
        target = idx ^ self.table[idx >> (2 * M)]
        new = np.empty_like(state)
        new[target] = state
        state = new
        tally.ue_calls += self.F.cost
        for j in range(M):
            control = (idx >> (2 * M - 1 - j)) & 1
            target = idx ^ (control << (M - 1 - j))
            new = np.empty_like(state)
            new[target] = state
            state = new
            tally.cnot += 1
        self._psi3, self._prep = state, tally
        return state

    def collapse(self, z: int) -> np.ndarray:
        """Normalized state of the (x, y) registers after the last register reads ``z``."""
        psi = self._prepare().reshape(-1, 1 << self.F.M)[:, z]
        return psi / np.linalg.norm(psi)

    def sample(self, rng) -> tuple[SimonSample, int]:
        """One full run; returns the sample and the intermediate measurement z."""
        seed = rng if isinstance(rng, (int, np.integer)) else None
        rng = make_rng(rng)
        N, M = self.F.N, self.F.M
        psi3 = self._prepare().reshape(-1, 1 << M)
        pz = np.sum(psi3 * psi3, axis=0)
        z = int(np.searchsorted(np.cumsum(pz), rng.random() * pz.sum(), side="right"))
        z = min(z, (1 << M) - 1)
        state = self.collapse(z)
        for q in range(N + M):
            state = _hadamard(state, q, N + M)
        probs = state * state
        cum = np.cumsum(probs)
        gamma = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        gamma = min(gamma, probs.size - 1)
        run = GateTally(1, self._prep.hadamard + N + M, self._prep.cnot, self._prep.ue_calls)
        self.tally = self.tally + run
        return SimonSample(BitVec(N + M, gamma), N, "statevector",
                           None if seed is None else int(seed)), z

    def premeasurement_distribution(self) -> np.ndarray:
        """Law of gamma with every measurement deferred to the end (float pmf)."""
        N, M = self.F.N, self.F.M
        state = self._prepare().copy()
        for q in range(N + M):
            state = _hadamard(state, q, self.width)
        amp = state.reshape(-1, 1 << M)
        return np.sum(amp * amp, axis=1)


def simon_sample_statevector(F: FunctionView, rng) -> SimonSample:
    return StatevectorSimulator(F).sample(rng)[0]


def statevector_distribution(F: FunctionView) -> np.ndarray:
    return StatevectorSimulator(F).premeasurement_distribution()


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def collect_samples(F: FunctionView, seeds, backend: str = "fourier"):
    """Samples for ``seeds`` plus the gate tally of the runs that produced them."""
    if backend == "fourier":
        return fourier_samples(F, list(seeds)), GateTally.for_runs(F, len(seeds))
    if backend == "statevector":
        sim = StatevectorSimulator(F)
        samples = [sim.sample(s)[0] for s in seeds]
        return samples, sim.tally
    raise ValueError(f"unknown backend {backend!r}")
