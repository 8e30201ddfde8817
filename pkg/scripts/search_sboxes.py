"""Pick the 4-bit S-boxes and the bit permutation for the shipped toy ciphers.

Scans seeded random 4-bit bijections with the exhaustive linear-structure oracle:

* weak:   the S-box has exactly one nonzero linear structure (a, b), with
          wt(a) = wt(b) = 2 so that a bit permutation can route b back onto a;
* strong: no single-bit component (or any nonzero output mask) has a nonzero
          linear structure.

The permutation sends the two bits of b in the left nibble onto the bits of a
in the right nibble, so (a || 0) survives two SPN rounds with probability 1,
while every nibble still feeds two bits into each nibble.

Usage: python scripts/search_sboxes.py [--seed 2024] [--out src/qidiff/ciphers]
"""
import argparse
import json
from pathlib import Path

import numpy as np

from qidiff.cipher import FunctionView, CipherSpec
from qidiff.oracle import brute_linear_structures


def structures(sbox):
    space = brute_linear_structures(FunctionView.from_table(4, 4, sbox))
    return space


def has_component_structure(sbox):
    table = np.array(sbox)
    for mask in range(1, 16):
        bits = np.array([bin(int(v) & mask).count("1") & 1 for v in table])
        if brute_linear_structures(FunctionView.from_table(4, 1, bits)).dim:
            return True
    return False


def positions(nibble):
    return [i for i in range(1, 5) if (nibble >> (4 - i)) & 1]


def routing_perm(a, b):
    """perm[j-1] = destination of bit j; left nibble is 1..4, right is 5..8."""
    perm = [0] * 8
    lb = positions(b)
    lnb = [p for p in range(1, 5) if p not in lb]
    ra = [4 + p for p in positions(a)]
    rna = [p for p in range(5, 9) if p not in ra]
    rb = [4 + p for p in positions(b)]
    rnb = [p for p in range(5, 9) if p not in rb]
    for src, dst in zip(lb, ra):
        perm[src - 1] = dst
    left_targets = iter(range(1, 5))
    for src in (lnb[0], rb[0], lnb[1], rnb[0]):
        perm[src - 1] = next(left_targets)
    perm[rb[1] - 1] = rna[0]
    perm[rnb[1] - 1] = rna[1]
    return perm


def search(seed):
    rng = np.random.default_rng(seed)
    weak = strong = None
    tries = 0
    while weak is None or strong is None:
        tries += 1
        sbox = [int(v) for v in rng.permutation(16)]
        space = structures(sbox)
        if weak is None and space.dim == 1:
            (v,) = space.basis
            a, b = v >> 4, v & 15
            if bin(a).count("1") == 2 and bin(b).count("1") == 2:
                weak = (sbox, a, b, tries)
        elif strong is None and space.dim == 0 and not has_component_structure(sbox):
            strong = (sbox, tries)
    return weak, strong


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--out", default="src/qidiff/ciphers")
    args = parser.parse_args()

    (wsbox, a, b, wtries), (ssbox, stries) = search(args.seed)
    perm = routing_perm(a, b)
    print(f"weak sbox after {wtries} draws: {wsbox} structure a={a:04b} b={b:04b}")
    print(f"strong sbox after {stries} draws: {ssbox}")
    print(f"perm: {perm}")

    hexes = lambda s: [format(v, "x") for v in s]
    configs = {
        "toyfeistel8": dict(name="ToyFeistel-8", n=8, m=8, r=2, family="feistel",
                            sbox=hexes(ssbox), schedule=1, search_seed=args.seed,
                            description="(L,R) -> (R, L ^ S(R ^ k_i)); k_i = high nibble of rotl(K, i)"),
        "weakspn8": dict(name="WeakSPN-8", n=8, m=8, r=4, family="spn", sbox=hexes(wsbox),
                         perm=perm, schedule=1, search_seed=args.seed,
                         description=f"S-box linear structure ({a:x}, {b:x}); perm routes it over two rounds"),
        "strongspn8": dict(name="StrongSPN-8", n=8, m=8, r=4, family="spn", sbox=hexes(ssbox),
                           perm=perm, schedule=1, search_seed=args.seed,
                           description="S-box without linear structures in any output mask"),
    }
    out = Path(args.out)
    for fname, data in configs.items():
        CipherSpec(data["name"], 8, 8, data["r"], data["family"], tuple(int(h, 16) for h in data["sbox"]),
                   tuple(data["perm"]) if "perm" in data else None)
        (out / f"{fname}.json").write_text(json.dumps(data, indent=2) + "\n")
        print(f"wrote {out / fname}.json")


if __name__ == "__main__":
    main()
