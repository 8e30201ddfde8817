from fractions import Fraction

import numpy as np
import pytest

from qidiff import oracle
from qidiff.cipher import FunctionView, builtin_cipher, component_view, prefix_view, rounds_view
from qidiff.errors import TooLarge
from qidiff.fixtures import and2, constant, identity, linear, sbox, standard_fixtures
from qidiff.gf2 import BitVec, StructureSpace, constrain_prefix_zero, enumerate_space
from qidiff.oracle import TruncatedDiff


def naive_structures(F):
    t = F.require_table().astype(np.int64)
    x = np.arange(t.size)
    found = []
    for a in range(t.size):
        d = t ^ t[x ^ a]
        if np.all(d == d[0]):
            found.append((a << F.M) | int(d[0]))
    return set(found)


def naive_theta(F, structures):
    t = F.require_table().astype(np.int64)
    x = np.arange(t.size)
    best = 0
    for a in range(t.size):
        counts = np.bincount(t ^ t[x ^ a], minlength=1 << F.M)
        for b in range(1 << F.M):
            if ((a << F.M) | b) not in structures:
                best = max(best, int(counts[b]))
    return Fraction(best, t.size)


# --- linear structures --------------------------------------------------------

def test_linear_map_structures():
    F = linear(5, 3, 4)
    space = oracle.brute_linear_structures(F)
    assert space.dim == 5
    for a in range(32):
        assert ((a << 3) | int(F(a) ^ F(0))) in space


def test_constant_structures():
    space = oracle.brute_linear_structures(constant(4, 2, 3))
    assert {v.value for v in enumerate_space(space)} == {a << 2 for a in range(16)}


def test_identity_structures():
    space = oracle.brute_linear_structures(identity(4))
    assert space.dim == 4
    assert sorted(v.hex() for v in space.vectors()) == ["11", "22", "44", "88"]


def test_weak_sbox_single_structure():
    space = oracle.brute_linear_structures(sbox("weakspn8"))
    assert space.dim == 1
    assert space.basis[0] == 0b0110_0110


def test_strong_sbox_no_structure():
    assert oracle.brute_linear_structures(sbox("strongspn8")).dim == 0


@pytest.mark.parametrize("F", [f for f in standard_fixtures() if f.N <= 8], ids=lambda F: F.name)
def test_structures_match_naive_scan(F):
    space = oracle.brute_linear_structures(F)
    assert {v.value for v in enumerate_space(space)} == naive_structures(F)


def test_structures_too_wide():
    with pytest.raises(TooLarge):
        oracle.brute_linear_structures(FunctionView(22, 1, func=lambda v: v & 1))


# --- theta ----------------------------------------------------------------

def test_identity_theta_zero():
    assert oracle.brute_theta(identity(5)).theta == 0


def test_and2_theta():
    rep = oracle.brute_theta(and2())
    assert rep.theta == Fraction(1, 2)
    a, b = rep.argmax_pair
    assert oracle.match_fraction(and2(), a.value, b.value) == Fraction(1, 2)


def test_toyfeistel_prefix_theta_golden(toyfeistel):
    rep = oracle.brute_theta(prefix_view(toyfeistel, 1))
    assert rep.theta == Fraction(3, 8)
    assert rep.argmax_pair == (BitVec(16, 0x0003), BitVec(8, 0x31))


def test_shipped_view_thetas(weakspn, strongspn):
    assert max(oracle.brute_theta(rounds_view(weakspn, t, d)).theta
               for t in (1, 2, 3) for d in ("forward", "backward")) == Fraction(1, 4)
    assert oracle.brute_theta(rounds_view(strongspn, 3)).theta == Fraction(1, 4)


@pytest.mark.parametrize("F", [f for f in standard_fixtures() if f.N <= 8],
                         ids=lambda F: F.name)
def test_theta_matches_naive(F):
    structures = {v.value for v in enumerate_space(oracle.brute_linear_structures(F))}
    rep = oracle.brute_theta(F)
    assert rep.theta == naive_theta(F, structures)
    a, b = rep.argmax_pair
    assert ((a.value << F.M) | b.value) not in structures
    if rep.theta:
        assert oracle.match_fraction(F, a.value, b.value) == rep.theta


def random_function(N, M, seed):
    table = np.random.default_rng(seed).integers(0, 1 << M, 1 << N)
    return FunctionView.from_table(N, M, table, name=f"random:{N}:{M}:{seed}")


@pytest.mark.parametrize("N,M,seed", [(7, 6, 0), (6, 3, 1), (5, 8, 2), (8, 1, 3)])
def test_theta_random_functions(N, M, seed):
    F = random_function(N, M, seed)
    structures = {v.value for v in enumerate_space(oracle.brute_linear_structures(F))}
    assert oracle.brute_theta(F).theta == naive_theta(F, structures)


def test_spectral_and_histogram_scans_agree(monkeypatch):
    F = random_function(7, 3, 11)
    spectral = oracle.brute_theta(F)
    monkeypatch.setattr(oracle, "SPECTRAL_THETA_MAX_M", 0)
    assert oracle.brute_theta(F) == spectral


def test_component_thetas_match_single_views(weakspn):
    view = prefix_view(weakspn, 1)
    reps = oracle.brute_component_thetas(view)
    assert len(reps) == 8
    for i in (1, 4, 8):
        assert reps[i - 1].theta == oracle.brute_theta(component_view(view, i)).theta


def test_theta_report_flags_bound():
    rep = oracle.brute_theta(and2(), e0=Fraction(1, 4))
    assert rep.exceeds_bound
    assert rep.to_json()["theta"] == "1/2"


# --- truncated differentials ----------------------------------------------------

def test_truncated_pattern_algebra():
    p, q = TruncatedDiff("01*1"), TruncatedDiff("0*01")
    assert p.contradicts(q) is False
    assert TruncatedDiff("1**0").contradicting_bits(TruncatedDiff("0**0")) == [1]
    assert TruncatedDiff.from_masks(4, 0b1000, 0b1010).pattern == "10*0"
    assert BitVec.from_bits("1010") in TruncatedDiff("1*10")
    assert TruncatedDiff("01*1").determined() == [1, 2, 4]
    with pytest.raises(ValueError):
        TruncatedDiff("01x")


def test_feistel_one_round_patterns(toyfeistel):
    found = {d.input_diff.value: d.output_pattern.pattern
             for d in oracle.brute_prob1_truncated(toyfeistel, 1)}
    for alpha in range(1, 16):
        assert found[alpha << 4] == "0000" + format(alpha, "04b")


def test_feistel_two_round_patterns(toyfeistel):
    spec = toyfeistel.with_rounds(3)
    found = {d.input_diff.value: d.output_pattern.pattern
             for d in oracle.brute_prob1_truncated(spec, 2)}
    for alpha in range(1, 16):
        assert found[alpha << 4] == format(alpha, "04b") + "****"


def test_strongspn_two_rounds_empty(strongspn):
    assert oracle.brute_prob1_truncated(strongspn, 2) == []


def test_truncated_patterns_hold_for_all_keys(weakspn):
    table = rounds_view(weakspn, 2).table.reshape(256, 256).astype(np.int64)
    xs = np.arange(256)
    for d in oracle.brute_prob1_truncated(weakspn, 2):
        diffs = (table ^ table[:, xs ^ d.input_diff.value]).ravel()
        for v in np.unique(diffs):
            assert BitVec(8, int(v)) in d.output_pattern


@pytest.mark.parametrize("name,direction", [("toyfeistel8", "forward"), ("toyfeistel8", "backward"),
                                            ("weakspn8", "forward"), ("weakspn8", "backward")])
def test_full_patterns_are_zero_key_structures(name, direction):
    spec = builtin_cipher(name)
    view = rounds_view(spec, 1, direction)
    zero_key = constrain_prefix_zero(oracle.brute_linear_structures(view), spec.m)
    from_structures = {(v.value >> spec.n) & 0xFF: v.value & 0xFF
                       for v in enumerate_space(zero_key) if (v.value >> spec.n) & 0xFF}
    from_patterns = {d.input_diff.value: int(d.output_pattern.pattern, 2)
                     for d in oracle.brute_prob1_truncated(spec, 1, direction)
                     if "*" not in d.output_pattern.pattern}
    assert from_structures == from_patterns


# --- impossible differentials -----------------------------------------------------

def test_toyfeistel_id_family(toyfeistel):
    ids = {(a.value, b.value) for a, b in oracle.brute_impossible_differentials(toyfeistel)}
    assert len(ids) == 53577
    for alpha in range(1, 16):
        for beta in range(16):
            if beta == alpha:
                continue
            for delta in range(16):
                if beta or delta:
                    assert ((alpha << 4), (beta << 4) | delta) in ids


def test_shipped_id_counts(weakspn, strongspn):
    assert len(oracle.brute_impossible_differentials(weakspn)) == 305
    assert oracle.brute_impossible_differentials(strongspn) == set()


def test_reachable_not_impossible(weakspn):
    ids = oracle.brute_impossible_differentials(weakspn)
    k, x = 0x5a, 0x33
    for din in (1, 0x60, 0xff):
        dout = int(weakspn.encrypt(k, x)) ^ int(weakspn.encrypt(k, x ^ din))
        assert (BitVec(8, din), BitVec(8, dout)) not in ids
        assert not oracle.verify_impossible(weakspn, din, dout)


def test_ids_reverified_with_other_loop_order(weakspn):
    ids = sorted(oracle.brute_impossible_differentials(weakspn))
    for a, b in ids[::7]:
        assert oracle.verify_impossible(weakspn, a, b)


def test_contradiction_pairs_example():
    fw = [oracle.Prob1TruncatedDiff(BitVec(4, 1), TruncatedDiff("1*0*"), "forward", 1)]
    bw = [oracle.Prob1TruncatedDiff(BitVec(4, 2), TruncatedDiff("0*0*"), "backward", 1),
          oracle.Prob1TruncatedDiff(BitVec(4, 3), TruncatedDiff("1***"), "backward", 1)]
    assert oracle.contradiction_pairs(fw, bw) == {(1, 2): [1]}


def test_impossible_scan_too_large():
    spec = builtin_cipher("weakspn8")
    from qidiff.cipher import CipherSpec
    big = CipherSpec("Big", 12, 12, 2, "feistel", tuple(range(64)))
    with pytest.raises(TooLarge):
        oracle.brute_impossible_differentials(big)
    assert spec.n == 8


def test_structure_space_type():
    assert isinstance(oracle.brute_linear_structures(and2()), StructureSpace)
