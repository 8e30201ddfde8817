"""Named test functions, addressable from the command line as ``kind:args``.

=====================  ===============================================
``identity:N``         x -> x
``const:N:M[:v]``      x -> v (default 0)
``linear:N:M:seed``    x -> A x for a seeded random GF(2) matrix A
``and2``               (x1, x2) -> x1 x2
``sbox:NAME``          the 4-bit S-box of a shipped cipher
``round:NAME:t[:dir]`` keyed t-round view of a shipped cipher
``bit:NAME:t:i[:dir]`` output bit i of that view
=====================  ===============================================
"""
from __future__ import annotations

import numpy as np

from .cipher import FunctionView, builtin_cipher, component_view, rounds_view
from .errors import ConfigError


def identity(N: int) -> FunctionView:
    return FunctionView.from_table(N, N, np.arange(1 << N), name=f"identity:{N}")


def constant(N: int, M: int, value: int = 0) -> FunctionView:
    return FunctionView.from_table(N, M, np.full(1 << N, value), name=f"const:{N}:{M}:{value}")


def linear(N: int, M: int, seed: int = 0) -> FunctionView:
    A = np.random.default_rng(seed).integers(0, 2, size=(M, N))
    x = np.arange(1 << N)
    bits = (x[:, None] >> np.arange(N - 1, -1, -1)) & 1
    out = (bits @ A.T) & 1
    table = out @ (1 << np.arange(M - 1, -1, -1))
    return FunctionView.from_table(N, M, table, name=f"linear:{N}:{M}:{seed}")


def and2() -> FunctionView:
    return FunctionView.from_table(2, 1, [0, 0, 0, 1], name="and2")


def sbox(cipher: str) -> FunctionView:
    spec = builtin_cipher(cipher)
    w = spec.w
    return FunctionView.from_table(w, w, list(spec.sbox), name=f"sbox:{cipher}")


def parse_function(text: str) -> FunctionView:
    """Build a fixture from its ``kind:args`` name."""
    kind, *args = text.split(":")
    try:
        if kind == "identity":
            return identity(int(args[0]))
        if kind == "const":
            return constant(*map(int, args))
        if kind == "linear":
            return linear(*map(int, args))
        if kind == "and2" and not args:
            return and2()
        if kind == "sbox":
            return sbox(args[0])
        if kind == "round":
            direction = args[2] if len(args) > 2 else "forward"
            return rounds_view(builtin_cipher(args[0]), int(args[1]), direction)
        if kind == "bit":
            direction = args[3] if len(args) > 3 else "forward"
            return component_view(rounds_view(builtin_cipher(args[0]), int(args[1]), direction), int(args[2]))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad function spec {text!r}: {exc}") from None
    raise ConfigError(f"unknown function spec {text!r}")


def standard_fixtures() -> list[FunctionView]:
    """Functions small enough for every backend (N + 2M <= 18)."""
    return [
        constant(3, 2), constant(4, 3, 5), identity(4), identity(6),
        linear(5, 3, 1), linear(6, 4, 7), and2(),
        sbox("weakspn8"), sbox("strongspn8"), sbox("toyfeistel8"),
        rounds_view(builtin_cipher("tinyfeistel4"), 1), rounds_view(builtin_cipher("tinyfeistel4"), 1, "backward"),
        component_view(rounds_view(builtin_cipher("weakspn8"), 1), 1),
    ]
