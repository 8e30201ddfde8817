"""Closed-form quantum resource counts for the two searches.

Every count is an exact Python integer. ``per_split_estimate`` rebuilds the same
totals from the circuit of one subroutine run (2(N+M) Hadamards, M CNOTs, one
oracle call) multiplied out split by split, which is what the closed forms
aggregate; the tests check the two agree.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import BadParams

ALGORITHMS = ("FindImpoDiff", "FindImpoDiff2")
_ALIASES = {"full": "FindImpoDiff", "truncated": "FindImpoDiff2",
            "findimpodiff": "FindImpoDiff", "findimpodiff2": "FindImpoDiff2"}
MAX_PARAM = 1 << 20


def canonical_algorithm(name: str) -> str:
    if name in ALGORITHMS:
        return name
    try:
        return _ALIASES[name.lower()]
    except KeyError:
        raise BadParams(f"unknown algorithm {name!r}; expected one of {ALGORITHMS}") from None


@dataclass(frozen=True)
class ResourceEstimate:
    algorithm: str
    n: int
    m: int
    r: int
    c: int
    tau: int
    cnot: int
    hadamard: int
    ue_calls: int
    qubits: int

    def __post_init__(self):
        if self.tau != self.c * (self.r - 1):
            raise ValueError("tau must equal c(r-1)")
        if min(self.cnot, self.hadamard, self.ue_calls, self.qubits) < 0:
            raise ValueError("negative resource count")

    def classical_cost(self) -> int:
        """Gaussian-elimination work for FindImpoDiff, 2c(r-1)n^2(m+2n), up to constants."""
        n, m = self.n, self.m
        if self.algorithm == "FindImpoDiff":
            return 2 * self.tau * n * n * (m + 2 * n)
        return 2 * self.tau * n * (m + n + 1) ** 2

    def to_json(self) -> dict:
        out = asdict(self)
        out["classical_cost"] = self.classical_cost()
        return out


def _check(n, m, r, c):
    for name, v in (("n", n), ("m", m), ("r", r), ("c", c)):
        if not isinstance(v, int) or isinstance(v, bool):
            raise BadParams(f"{name} must be an integer")
        if v < 1:
            raise BadParams(f"{name} must be at least 1")
        if v > MAX_PARAM:
            raise BadParams(f"{name} must not exceed 2^20")


def estimate(algorithm: str, n: int, m: int, r: int, c: int) -> ResourceEstimate:
    algorithm = canonical_algorithm(algorithm)
    _check(n, m, r, c)
    tau = c * (r - 1)
    if algorithm == "FindImpoDiff":
        cnot = 2 * tau * (2 * n * n + n * m)
        hadamard = 4 * tau * (m * m + 4 * n * n + 4 * m * n)
        ue = tau * (m + 2 * n)
        qubits = m + 3 * n
    else:
        cnot = 2 * tau * (n * n + n * m + n)
        hadamard = 4 * tau * n * (n + m + 1) ** 2
        ue = tau * (1 + n + m)
        qubits = m + n + 2
    return ResourceEstimate(algorithm, n, m, r, c, tau, cnot, hadamard, ue, qubits)


def per_split_estimate(algorithm: str, n: int, m: int, r: int, c: int) -> ResourceEstimate:
    """The same counts, summed split by split from the per-run circuit."""
    algorithm = canonical_algorithm(algorithm)
    _check(n, m, r, c)
    N = m + n
    M, views = (n, 1) if algorithm == "FindImpoDiff" else (1, n)
    cnot = hadamard = ue = 0
    for r1 in range(1, r):
        r2 = r - r1
        for _ in range(views):
            runs = c * (N + M)
            # forward view over r1 rounds, backward view over r2 rounds
            hadamard += 2 * runs * 2 * (N + M)
            cnot += 2 * runs * M
            # each view costs a fraction (rounds / r) / views of one full encryption
            ue += runs * (r1 + r2)
    ue, rest = divmod(ue, r * views)
    assert rest == 0
    return ResourceEstimate(algorithm, n, m, r, c, c * (r - 1), cnot, hadamard,
                            ue, N + 2 * M)
