"""Toy block ciphers defined by JSON configs and the keyed function views built on them.

A keyed view takes the key and the block as one input word: the key occupies
the leftmost ``m`` positions, the block the remaining ``n``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np

from .errors import BadIndex, BadSplit, ConfigError, TooLarge

TABULATE_LIMIT = 24
FAMILIES = ("feistel", "spn")

SCHEMA = json.loads(resources.files(__package__).joinpath("ciphers/schema.json").read_text())


def _dtype_for(width: int):
    return np.uint32 if width <= 32 else np.uint64


@dataclass(eq=False)
class FunctionView:
    """A total map F_2^N -> F_2^M, tabulated when N is small enough."""

    N: int
    M: int
    func: Callable[[np.ndarray], np.ndarray] | None = None
    table: np.ndarray | None = None
    name: str = ""
    # share of one full r-round cipher circuit spent per evaluation
    cost: Fraction = Fraction(1)

    def __post_init__(self):
        if self.table is None and self.func is None:
            raise ValueError("a view needs a table or an evaluator")
        if self.table is not None:
            self.table = np.ascontiguousarray(self.table, dtype=_dtype_for(self.M))
            if self.table.shape != (1 << self.N,):
                raise ValueError(f"table must have 2^{self.N} entries")
        elif self.N <= TABULATE_LIMIT:
            self.table = self._evaluate(np.arange(1 << self.N, dtype=np.uint64))

    @classmethod
    def from_table(cls, N, M, table, name=""):
        return cls(N, M, table=np.asarray(table), name=name)

    def _evaluate(self, inputs: np.ndarray) -> np.ndarray:
        if self.N > 64:
            raise TooLarge(f"view {self.name or '?'} input width", self.N, 64)
        out = np.asarray(self.func(inputs))
        return out.astype(_dtype_for(self.M))

    def __call__(self, inputs):
        scalar = np.isscalar(inputs)
        arr = np.atleast_1d(np.asarray(inputs, dtype=np.uint64))
        if self.table is not None:
            out = self.table[arr.astype(np.int64)]
        else:
            out = self._evaluate(arr)
        return int(out[0]) if scalar else out

    @property
    def tabulated(self) -> bool:
        return self.table is not None

    def require_table(self, limit: int = TABULATE_LIMIT) -> np.ndarray:
        if self.table is None or self.N > limit:
            raise TooLarge(f"view {self.name or '?'} input width", self.N, limit)
        return self.table


def component_view(view: FunctionView, i: int) -> FunctionView:
    """Output bit ``i`` (1 = leftmost) of ``view``."""
    if not 1 <= i <= view.M:
        raise BadIndex(i, view.M)
    shift = view.M - i
    name = f"{view.name}[{i}]"
    cost = view.cost / view.M
    if view.table is not None:
        return FunctionView(view.N, 1, table=(view.table >> shift) & 1, name=name, cost=cost)
    return FunctionView(view.N, 1, func=lambda v: (view(v) >> shift) & 1, name=name, cost=cost)


def _rotl(v, amount: int, width: int):
    amount %= width
    mask = (1 << width) - 1
    if amount == 0:
        return v
    return ((v << np.uint64(amount)) | (v >> np.uint64(width - amount))) & np.uint64(mask)


@dataclass(frozen=True)
class CipherSpec:
    name: str
    n: int
    m: int
    r: int
    family: str
    sbox: tuple[int, ...]
    perm: tuple[int, ...] | None = None
    rotation: int = 1
    description: str = field(default="", compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        size = len(self.sbox)
        if size < 2 or size & (size - 1):
            raise ConfigError("sbox length must be a power of two")
        if sorted(self.sbox) != list(range(size)):
            raise ConfigError(f"{self.name}: sbox is not a bijection")
        if self.n > 64 or self.m > 64:
            raise ConfigError("block and key sizes above 64 bits are not supported")
        if self.r < 1:
            raise ConfigError("round count must be positive")
        width = self.round_width
        if self.family == "feistel" and self.n % 2:
            raise ConfigError("feistel block size must be even")
        if width % self.w:
            raise ConfigError(f"sbox width {self.w} does not divide {width}")
        if self.m < width:
            raise ConfigError(f"key size {self.m} shorter than round key width {width}")
        if self.family == "spn":
            if self.perm is None or sorted(self.perm) != list(range(1, self.n + 1)):
                raise ConfigError(f"{self.name}: perm is not a permutation of 1..{self.n}")

    @property
    def w(self) -> int:
        return len(self.sbox).bit_length() - 1

    @property
    def round_width(self) -> int:
        """Width of the S-box layer and of each round key."""
        return self.n // 2 if self.family == "feistel" else self.n

    @cached_property
    def _sbox(self) -> np.ndarray:
        return np.array(self.sbox, dtype=np.uint64)

    @cached_property
    def _inv_sbox(self) -> np.ndarray:
        inv = np.zeros(len(self.sbox), dtype=np.uint64)
        inv[list(self.sbox)] = np.arange(len(self.sbox), dtype=np.uint64)
        return inv

    @cached_property
    def _perm_moves(self) -> list[tuple[int, int]]:
        # (source shift, destination shift) for every bit
        return [(self.n - i, self.n - p) for i, p in enumerate(self.perm, start=1)]

    def round_key(self, key, i: int):
        key = np.asarray(key, dtype=np.uint64)
        rot = _rotl(key, self.rotation * i, self.m)
        return rot >> np.uint64(self.m - self.round_width)

    def _sub(self, v, table):
        w, mask = self.w, np.uint64(len(self.sbox) - 1)
        out = np.zeros_like(v)
        for j in range(0, self.round_width, w):
            out |= table[((v >> np.uint64(j)) & mask).astype(np.int64)] << np.uint64(j)
        return out

    def _permute(self, v, inverse=False):
        out = np.zeros_like(v)
        one = np.uint64(1)
        for src, dst in self._perm_moves:
            if inverse:
                src, dst = dst, src
            out |= ((v >> np.uint64(src)) & one) << np.uint64(dst)
        return out

    def _round(self, x, k):
        if self.family == "feistel":
            h = np.uint64(self.n // 2)
            left, right = x >> h, x & np.uint64((1 << self.n // 2) - 1)
            return (right << h) | (left ^ self._sub(right ^ k, self._sbox))
        return self._permute(self._sub(x ^ k, self._sbox))

    def _inverse_round(self, y, k):
        if self.family == "feistel":
            h = np.uint64(self.n // 2)
            left, right = y >> h, y & np.uint64((1 << self.n // 2) - 1)
            return ((right ^ self._sub(left ^ k, self._sbox)) << h) | left
        return self._sub(self._permute(y, inverse=True), self._inv_sbox) ^ k

    def encrypt_rounds(self, key, x, start: int, stop: int):
        """Apply rounds ``start..stop`` (1-based, inclusive) with scheduled round keys."""
        key = np.asarray(key, dtype=np.uint64)
        x = np.asarray(x, dtype=np.uint64)
        for i in range(start, stop + 1):
            x = self._round(x, self.round_key(key, i))
        return x

    def decrypt_rounds(self, key, y, start: int, stop: int):
        """Invert rounds ``start..stop``, undoing round ``stop`` first."""
        key = np.asarray(key, dtype=np.uint64)
        y = np.asarray(y, dtype=np.uint64)
        for i in range(stop, start - 1, -1):
            y = self._inverse_round(y, self.round_key(key, i))
        return y

    def encrypt(self, key, x):
        return self.encrypt_rounds(key, x, 1, self.r)

    def decrypt(self, key, y):
        return self.decrypt_rounds(key, y, 1, self.r)

    def codebook(self, rounds: int | None = None, direction: str = "forward") -> np.ndarray:
        """Table ``T[k, x]`` over all keys and blocks; needs n + m <= 24."""
        if self.n + self.m > TABULATE_LIMIT:
            raise TooLarge(f"{self.name} codebook n+m", self.n + self.m, TABULATE_LIMIT)
        return rounds_view(self, self.r if rounds is None else rounds, direction) \
            .table.reshape(1 << self.m, 1 << self.n)

    def to_json(self) -> dict:
        data = {"name": self.name, "n": self.n, "m": self.m, "r": self.r,
                "family": self.family, "sbox": [format(s, "x") for s in self.sbox],
                "schedule": self.rotation}
        if self.perm is not None:
            data["perm"] = list(self.perm)
        if self.description:
            data["description"] = self.description
        return data

    def with_rounds(self, r: int) -> "CipherSpec":
        return CipherSpec(self.name, self.n, self.m, r, self.family, self.sbox, self.perm,
                          self.rotation, self.description)


def rounds_view(spec: CipherSpec, rounds: int, direction: str = "forward") -> FunctionView:
    """Keyed view of the first ``rounds`` rounds (forward) or the inverse of the last ``rounds``."""
    if not 1 <= rounds <= spec.r:
        raise BadSplit(rounds, spec.r + 1)
    n, m = spec.n, spec.m
    bmask = np.uint64((1 << n) - 1)
    if direction == "forward":
        def func(v):
            return spec.encrypt_rounds(v >> np.uint64(n), v & bmask, 1, rounds)
        name = f"{spec.name}/E{rounds}"
    elif direction == "backward":
        def func(v):
            return spec.decrypt_rounds(v >> np.uint64(n), v & bmask, spec.r - rounds + 1, spec.r)
        name = f"{spec.name}/D{rounds}"
    else:
        raise ValueError(f"direction must be forward or backward, not {direction!r}")
    return FunctionView(m + n, n, func=func, name=name, cost=Fraction(rounds, spec.r))


def prefix_view(spec: CipherSpec, r1: int) -> FunctionView:
    if not 1 <= r1 <= spec.r - 1:
        raise BadSplit(r1, spec.r)
    return rounds_view(spec, r1, "forward")


def suffix_inverse_view(spec: CipherSpec, r2: int) -> FunctionView:
    if not 1 <= r2 <= spec.r - 1:
        raise BadSplit(r2, spec.r)
    return rounds_view(spec, r2, "backward")


def cipher_from_dict(data: dict) -> CipherSpec:
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid cipher config: {exc.message}") from None
    perm = data.get("perm")
    return CipherSpec(
        name=data["name"], n=data["n"], m=data["m"], r=data["r"],
        family=data["family"].lower(),
        sbox=tuple(int(s, 16) for s in data["sbox"]),
        perm=tuple(perm) if perm is not None else None,
        rotation=data.get("schedule", 1),
        description=data.get("description", ""),
    )


def load_cipher(path: str | Path) -> CipherSpec:
    path = Path(path)
    if not path.is_file():
        builtin = resources.files(__package__).joinpath(f"ciphers/{path.name}")
        if path.parent == Path(".") and builtin.is_file():
            return cipher_from_dict(json.loads(builtin.read_text()))
        raise ConfigError(f"cipher config {path} not found")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return cipher_from_dict(data)


def builtin_cipher(name: str, rounds: int | None = None) -> CipherSpec:
    """One of the shipped toys: toyfeistel8, weakspn8, strongspn8, tinyfeistel4."""
    spec = load_cipher(f"{name.lower()}.json")
    return spec if rounds is None else spec.with_rounds(rounds)
