import math
from fractions import Fraction

import pytest

from qidiff import oracle
from qidiff.cipher import component_view, rounds_view
from qidiff.errors import BadParams, BadSplit
from qidiff.finder import (ImpossibleDifferentialRecord, SearchParams, find_impo_diff,
                           find_impo_diff2, find_struct, record_confidence, recommended_c,
                           struct_failure_bound)
from qidiff.fixtures import and2, constant, identity, linear, sbox
from qidiff.gf2 import BitVec, constrain_prefix_zero, enumerate_space, parity


def oracle_pairs(spec, algorithm):
    """Pairs the search emits when every structure search returns the exact space."""
    n, m = spec.n, spec.m
    bits = [None] if algorithm == "full" else range(1, n + 1)
    M = n if algorithm == "full" else 1
    out = set()
    for r1 in range(1, spec.r):
        for b in bits:
            sides = []
            for rounds, d in ((r1, "forward"), (spec.r - r1, "backward")):
                view = rounds_view(spec, rounds, d)
                if b is not None:
                    view = component_view(view, b)
                space = constrain_prefix_zero(oracle.brute_linear_structures(view), m)
                sides.append([(v.value >> M, v.value & ((1 << M) - 1))
                              for v in enumerate_space(space) if v.value >> M])
            for dx1, dy1 in sides[0]:
                for dx2, dy2 in sides[1]:
                    if dy1 != dy2:
                        out.add((dx1, dx2))
    return out


def all_units_exact(result, spec):
    for u in result.units:
        rounds = u.split_r1 if u.direction == "forward" else spec.r - u.split_r1
        view = rounds_view(spec, rounds, u.direction)
        if u.bit_index:
            view = component_view(view, u.bit_index)
        if u.struct.space != oracle.brute_linear_structures(view):
            return False
    return True


# --- SearchParams -----------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [dict(c=0), dict(backend="gpu"), dict(e0=1),
                                    dict(e0=-0.1), dict(enumeration_cap=0), dict(workers=0)])
def test_params_validation(kwargs):
    with pytest.raises(BadParams):
        SearchParams(**kwargs)


def test_params_warn_when_c_too_small():
    assert SearchParams(c=4, e0=Fraction(1, 4)).warnings() != []
    assert SearchParams(c=5, e0=Fraction(1, 4)).warnings() == []
    assert "no e0" in SearchParams().warnings()[0]


def test_recommended_c():
    assert recommended_c(Fraction(1, 4)) == 5
    assert recommended_c(Fraction(1, 2)) == 7
    assert recommended_c(Fraction(7, 8)) == 25
    assert recommended_c(0) == 4


def test_bounds():
    assert struct_failure_bound(8, Fraction(1, 2), 3) == pytest.approx((2 * 0.75 ** 8) ** 3)
    assert record_confidence("full", 6, 0.25, 8, 8) == pytest.approx(1 - 2 * (2 * 0.625 ** 6) ** 24)
    assert record_confidence("truncated", 1, 0.5, 8, 8) == 0.0


# --- find_struct ------------------------------------------------------------------

def test_identity_struct_exact():
    F = identity(4)
    target = oracle.brute_linear_structures(F)
    for seed in range(100):
        res = find_struct(F, SearchParams(c=3, seed=seed))
        assert res.space == target
        assert res.space.dim == 4
        assert res.samples_used == 3 * 8


def test_constant_struct_contains_truth():
    F = constant(4, 2, 1)
    truth = oracle.brute_linear_structures(F)
    hits = 0
    for seed in range(50):
        res = find_struct(F, SearchParams(c=4, seed=seed))
        assert truth.issubspace(res.space)
        hits += res.space == truth
    assert hits >= 45


@pytest.mark.parametrize("F", [and2(), linear(5, 3, 2), sbox("weakspn8"), sbox("strongspn8")],
                         ids=lambda F: F.name)
def test_struct_contains_truth_every_seed(F):
    truth = oracle.brute_linear_structures(F)
    for seed in range(100):
        res = find_struct(F, SearchParams(c=2, seed=seed))
        assert truth.issubspace(res.space)
        for b in res.space.basis:
            assert all(parity(b & g.gamma.value) == 0 for g in res.gammas)


def test_and2_failure_rate_c6():
    # L is trivial iff at least 3 of the 4 nonzero vectors (g1, 1) are drawn in 18 samples
    p_fail = 6 * (3 / 4) ** 18 - 8 * (5 / 8) ** 18 + 3 * (1 / 2) ** 18
    runs = 1000
    fails = sum(find_struct(and2(), SearchParams(c=6, seed=s)).space.dim != 0 for s in range(runs))
    sigma = math.sqrt(runs * p_fail * (1 - p_fail))
    assert abs(fails - runs * p_fail) <= 3 * sigma
    bound = struct_failure_bound(6, Fraction(1, 2), 3)
    assert fails / runs <= bound + 3 * math.sqrt(bound * (1 - bound) / runs)


def test_struct_statevector_backend():
    F = linear(3, 2, 5)
    truth = oracle.brute_linear_structures(F)
    res = find_struct(F, SearchParams(c=3, seed=1, backend="statevector"))
    assert truth.issubspace(res.space)
    assert res.tally.runs == 15
    assert all(g.backend == "statevector" for g in res.gammas)


def test_struct_path_changes_samples():
    F = sbox("strongspn8")
    a = find_struct(F, SearchParams(c=2, seed=0), (1,))
    b = find_struct(F, SearchParams(c=2, seed=0), (2,))
    assert [g.gamma for g in a.gammas] != [g.gamma for g in b.gammas]


# --- find_impo_diff -----------------------------------------------------------------

def test_weakspn_records_sound_and_complete(weakspn):
    result = find_impo_diff(weakspn, SearchParams(c=6, seed=0, verify_with_oracle=True))
    ids = {(a.value, b.value) for a, b in oracle.brute_impossible_differentials(weakspn)}
    assert len(result) > 0
    assert all(r.verified == "oracle_confirmed" for r in result)
    assert result.pairs() <= ids
    if all_units_exact(result, weakspn):
        assert result.pairs() == oracle_pairs(weakspn, "full")


def test_weakspn_expected_family(weakspn):
    expected = oracle_pairs(weakspn, "full")
    assert (0x60, 0x48) in expected
    found = set()
    for seed in range(5):
        found |= find_impo_diff(weakspn, SearchParams(c=6, seed=seed)).pairs()
    assert expected <= found


def test_record_fields(weakspn):
    result = find_impo_diff(weakspn, SearchParams(c=6, seed=0, e0=Fraction(1, 4)))
    for rec in result:
        assert rec.dx1 and rec.dx2
        assert rec.algorithm == "full"
        assert rec.bit_index is None
        assert rec.confidence == pytest.approx(record_confidence("full", 6, 0.25, 8, 8))
        for w in rec.witnesses:
            assert w.dy1 != w.dy2
            assert 1 <= w.split_r1 < weakspn.r
    assert [r.pair for r in result] == sorted(r.pair for r in result)


def test_zero_difference_record_rejected():
    with pytest.raises(ValueError):
        ImpossibleDifferentialRecord(BitVec(8, 0), BitVec(8, 1), "full")


def test_single_round_cipher_rejected(weakspn):
    with pytest.raises(BadSplit):
        find_impo_diff(weakspn.with_rounds(1), SearchParams())


def test_truncation_flagged(toyfeistel):
    with pytest.warns(UserWarning, match="truncated"):
        result = find_impo_diff2(toyfeistel, SearchParams(c=6, seed=42, enumeration_cap=4,
                                                          e0=Fraction(1, 2)))
    flagged = [u for u in result.units if u.truncated]
    assert flagged and all(u.elements_scanned == 4 for u in flagged)
    assert any("truncated" in w for w in result.warnings)


# --- find_impo_diff2 -----------------------------------------------------------------

def test_toyfeistel_truncated_example(toyfeistel):
    result = find_impo_diff2(toyfeistel, SearchParams(c=6, seed=42, verify_with_oracle=True))
    records = {r.pair: r for r in result}
    rec = records[(0x10, 0x20)]
    assert rec.verified == "oracle_confirmed"
    # alpha = 0001, beta = 0010 differ at right-half positions 7 and 8
    assert {w.bit_index for w in rec.witnesses} == {7, 8}
    for w in rec.witnesses:
        assert w.dy1.width == 1 and w.dy1 != w.dy2


def test_toyfeistel_truncated_matches_contradictions(toyfeistel):
    result = find_impo_diff2(toyfeistel, SearchParams(c=6, seed=42, verify_with_oracle=True))
    assert all_units_exact(result, toyfeistel)
    fw = oracle.brute_prob1_truncated(toyfeistel, 1, "forward")
    bw = oracle.brute_prob1_truncated(toyfeistel, 1, "backward")
    assert result.pairs() == set(oracle.contradiction_pairs(fw, bw))
    assert result.pairs() == oracle_pairs(toyfeistel, "truncated")
    ids = {(a.value, b.value) for a, b in oracle.brute_impossible_differentials(toyfeistel)}
    found = result.pairs()
    assert found <= ids
    for alpha in range(1, 16):
        for beta in range(16):
            for delta in range(16):
                if beta != alpha and (beta or delta):
                    assert (alpha << 4, (beta << 4) | delta) in found


def test_strongspn_nothing_refuted(strongspn):
    for search, c in ((find_impo_diff, 5), (find_impo_diff2, 25)):
        result = search(strongspn, SearchParams(c=c, seed=7, verify_with_oracle=True))
        assert not any(r.verified == "oracle_refuted" for r in result)


# --- determinism ---------------------------------------------------------------

@pytest.mark.parametrize("search", [find_impo_diff, find_impo_diff2])
def test_worker_count_does_not_change_output(weakspn, search):
    one = search(weakspn, SearchParams(c=5, seed=11, workers=1)).to_json()
    many = search(weakspn, SearchParams(c=5, seed=11, workers=4)).to_json()
    assert one == many


def test_seed_changes_samples(weakspn):
    a = find_impo_diff(weakspn, SearchParams(c=5, seed=1))
    b = find_impo_diff(weakspn, SearchParams(c=5, seed=2))
    assert [g.gamma for g in a.units[0].struct.gammas] != [g.gamma for g in b.units[0].struct.gammas]


def test_result_json(weakspn):
    data = find_impo_diff(weakspn, SearchParams(c=5, seed=0, verify_with_oracle=True)).to_json()
    assert data["verification"]["oracle_refuted"] == 0
    assert len(data["units"]) == 2 * (weakspn.r - 1)
    rec = data["records"][0]
    assert set(rec) == {"dx1", "dx2", "algorithm", "verified", "confidence", "witnesses"}
    assert len(rec["dx1"]) == 2
