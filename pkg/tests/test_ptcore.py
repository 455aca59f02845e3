import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptrank.fieldlinalg import GF, Matrix, RationalField, random_nonsingular, rank, rank_factorization
from ptrank.ptcore import (BudgetExceeded, InvalidCertificate, canonical_kappa, example_3_squared,
                           example_identity_certificate, fully_symmetric_orbits, is_fully_symmetric,
                           is_pt_basic, kappa_subsets, kron_act, make_certificate, partial_transpose,
                           pt_rank_exact, pt_rank_search, pt_rank_table, ptrank_census, refine_certificate,
                           regroup, transpose_rank_growth, verify_pt_certificate)
from ptrank.tensorspace import HyperMatrix

import oracles

F2, F3, F5 = GF(2), GF(3), GF(5)


def _hm(n, d, F, seed):
    rng = np.random.default_rng(seed)
    return HyperMatrix.from_array(n, d, rng.integers(0, F.p, size=(n**d, n**d)), F)


# ----------------------------------------------------------------- transposes

def test_kappa_subsets_and_canonical():
    assert kappa_subsets(3) == [(), (1,), (1, 2), (2,)]
    assert len(kappa_subsets(3, full=True)) == 8
    assert canonical_kappa((2, 3), 3) == (1,)
    with pytest.raises(ValueError):
        canonical_kappa((4,), 3)


@settings(max_examples=40, deadline=None)
@given(d=st.integers(1, 3), seed=st.integers(0, 10**6), data=st.data())
def test_partial_transpose_matches_oracle(d, seed, data):
    M = _hm(2, d, F3, seed)
    kappa = data.draw(st.sampled_from(kappa_subsets(d, full=True)))
    want = oracles.partial_transpose(M.data.tolist(), 2, d, kappa)
    assert partial_transpose(M, kappa).data.tolist() == want
    assert partial_transpose(partial_transpose(M, kappa), kappa) == M


def test_partial_transpose_special_cases():
    M = _hm(3, 2, F3, 0)
    assert partial_transpose(M, ()) == M
    assert np.array_equal(partial_transpose(M, (1, 2)).data, M.data.T)
    # i_1 is the most significant index: T_2 transposes each 3x3 block in place
    # and T_1 moves block (a, b) to position (b, a)
    T1 = partial_transpose(M, (1,)).data
    T2 = partial_transpose(M, (2,)).data
    for a in range(3):
        for b in range(3):
            blk = M.data[3 * a:3 * a + 3, 3 * b:3 * b + 3]
            assert np.array_equal(T2[3 * a:3 * a + 3, 3 * b:3 * b + 3], blk.T)
            assert np.array_equal(T1[3 * b:3 * b + 3, 3 * a:3 * a + 3], blk)
    with pytest.raises(ValueError):
        partial_transpose(M, (3,))


def test_fully_symmetric():
    assert is_fully_symmetric(HyperMatrix.identity(2, 3, F3))
    assert not is_fully_symmetric(example_3_squared(F3))
    S = _hm(2, 2, F3, 4)
    total = sum((partial_transpose(S, k).data for k in kappa_subsets(2, full=True)), np.zeros((4, 4), dtype=np.int64))
    sym = S.with_body(F3.reduce(total * pow(4, -1, 3)))
    assert is_fully_symmetric(sym)


# ----------------------------------------------------------------- PT-basic

def test_example_3_squared():
    X = example_3_squared(RationalField())
    assert rank(X.body) == 9
    assert is_pt_basic(X) == (True, (1,))
    assert pt_rank_search(example_3_squared(F3), "single-kappa").value == 1


def test_identity_not_basic():
    assert is_pt_basic(HyperMatrix.identity(2, 2, F2)) == (False, None)
    assert is_pt_basic(HyperMatrix.zeros(2, 2, F2)) == (False, None)


# ----------------------------------------------------------------- certificates

def test_identity_certificate_value_two():
    for F in (F2, F3, RationalField()):
        cert = example_identity_certificate(F)
        assert verify_pt_certificate(cert) == cert.value == 2


def test_corrupted_certificate_rejected():
    cert = example_identity_certificate(F3)
    bad = dict(cert.parts)
    bad[()] = bad[()].with_body(F3.reduce(bad[()].data + np.eye(4, dtype=np.int64)))
    cert.parts = bad
    with pytest.raises(InvalidCertificate):
        verify_pt_certificate(cert)


def test_single_part_certificate():
    M = _hm(2, 2, F3, 8)
    assert verify_pt_certificate(make_certificate(M, {(): M})) == rank(M.body)


# ----------------------------------------------------------------- exact oracles

def test_exact_identity_gf2():
    value, cert = pt_rank_exact(HyperMatrix.identity(2, 2, F2))
    assert value == 2 == verify_pt_certificate(cert)
    assert pt_rank_exact(HyperMatrix.zeros(2, 2, F2))[0] == 0


def test_exact_matches_brute_force_oracle():
    I = HyperMatrix.identity(2, 2, F2)
    assert oracles.pt_rank_brute(I.data.tolist(), 2, 2, 2) == 2
    for seed in (1, 2):
        M = _hm(2, 2, F2, seed)
        want = oracles.pt_rank_brute(M.data.tolist(), 2, 2, 2)
        assert pt_rank_exact(M)[0] == want
        assert pt_rank_table(M)[0] == want


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_exhaustive_and_table_agree(seed):
    M = _hm(2, 2, F2, seed)
    v1, c1 = pt_rank_exact(M)
    v2, c2 = pt_rank_table(M)
    assert v1 == v2 == verify_pt_certificate(c1) == verify_pt_certificate(c2)


def test_rank_one_has_value_one():
    u = np.array([1, 0, 1, 1])
    M = HyperMatrix.from_array(2, 2, np.outer(u, [0, 1, 1, 0]), F2)
    assert pt_rank_exact(M)[0] == 1


def test_budget_and_field_errors():
    with pytest.raises(BudgetExceeded):
        pt_rank_exact(HyperMatrix.identity(2, 2, F3), budget=10)
    with pytest.raises(ValueError):
        pt_rank_exact(HyperMatrix.identity(2, 2, RationalField()))


@pytest.mark.parametrize("strategy", ["single-kappa", "greedy-peel", "restart-local"])
def test_search_strategies_give_valid_bounds(strategy):
    I = HyperMatrix.identity(2, 2, F2)
    cert = pt_rank_search(I, strategy, seed=3)
    assert 2 <= verify_pt_certificate(cert) == cert.value <= 4
    for seed in range(5):
        M = _hm(2, 3, F3, seed)
        c = pt_rank_search(M, strategy, seed=seed)
        assert verify_pt_certificate(c) <= min(rank(partial_transpose(M, k).body) for k in kappa_subsets(3))


# ----------------------------------------------------------------- actions and regrouping

def test_kron_act_identity_factors():
    cert = example_identity_certificate(F3)
    PM, out = kron_act(cert.target, [Matrix(F3.eye(2), F3)] * 2, cert)
    assert PM == cert.target and out.value == cert.value


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_kron_act_invariance(seed):
    M = _hm(2, 2, F2, seed)
    Bs = [random_nonsingular(2, F2, seed=seed + k) for k in range(2)]
    value, cert = pt_rank_exact(M)
    PM, moved = kron_act(M, Bs, cert)
    assert verify_pt_certificate(moved) == value
    assert pt_rank_exact(PM)[0] == value


def test_kron_act_singular_monotone():
    cert = example_identity_certificate(F3)
    Bs = [Matrix([[1, 0], [0, 0]], F3), Matrix(F3.eye(2), F3)]
    _, moved = kron_act(cert.target, Bs, cert)
    assert verify_pt_certificate(moved) <= cert.value


def test_regroup_coarse_value_bounds_fine():
    for seed in range(20):
        M = _hm(2, 2, F2, seed)
        coarse = regroup(M, 2, 1)
        assert coarse.d == 1 and coarse.n == 4
        assert pt_rank_exact(M)[0] <= rank(coarse.body)
    with pytest.raises(ValueError):
        regroup(M, 3, 1)


def test_refine_identity_certificate():
    I16 = HyperMatrix.identity(4, 2, F3)
    coarse = make_certificate(I16, {(1,): I16})
    fine = refine_certificate(coarse, 2, 2)
    assert fine.d == 4 and verify_pt_certificate(fine) == coarse.value == 16
    assert list(fine.parts) == [(1, 2)]


def test_transpose_rank_growth_tight_example():
    X = example_3_squared(F3)
    T = partial_transpose(X, (1,))        # rank one
    factors = rank_factorization(T.body)
    assert len(factors) == 1
    out = transpose_rank_growth(T, (1,), factors)
    assert len(out) == 9 and rank(X.body) == 9


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), d=st.integers(1, 3), data=st.data())
def test_transpose_rank_growth_reassembles(seed, d, data):
    kappa = data.draw(st.sampled_from(kappa_subsets(d, full=True)))
    rng = np.random.default_rng(seed)
    n = 3 if d < 3 else 2
    a, b = rng.integers(0, 5, size=n**d), rng.integers(0, 5, size=n**d)
    M = HyperMatrix.from_array(n, d, F5.reduce(np.outer(a, b)), F5)
    out = transpose_rank_growth(M, kappa, [(a, b)])
    assert len(out) <= n ** (2 * min(len(kappa), d - len(kappa)))
    total = F5.reduce(sum(np.outer(u, v) for u, v in out)) if out else np.zeros((n**d, n**d))
    assert np.array_equal(total, partial_transpose(M, kappa).data)
    with pytest.raises(ValueError):
        transpose_rank_growth(M, kappa, [(a, a)] if not np.array_equal(a, b) else [])


# ----------------------------------------------------------------- census

CENSUS_2_2_GF2 = {0: 1, 1: 369, 2: 24018, 3: 41148}


def _census_oracle():
    """Sumset levels over all 65536 matrices with matrices as 16-bit masks."""
    vecs = range(1, 16)
    rank_one = set()
    for u in vecs:
        for v in vecs:
            rows = [[(u >> (3 - r) & 1) * (v >> (3 - c) & 1) for c in range(4)] for r in range(4)]
            for kap in ((), (1,)):
                t = oracles.partial_transpose(rows, 2, 2, kap)
                rank_one.add(sum(t[r][c] << (4 * r + c) for r in range(4) for c in range(4)))
    seen = {0: 0}
    frontier = {0}
    level = 0
    while len(seen) < 1 << 16:
        level += 1
        frontier = {x ^ b for x in frontier for b in rank_one} - seen.keys()
        for x in frontier:
            seen[x] = level
    hist = {}
    for v in seen.values():
        hist[v] = hist.get(v, 0) + 1
    return hist


def test_census_oracle_frozen():
    assert _census_oracle() == CENSUS_2_2_GF2


def test_census_exhaustive():
    out = ptrank_census(2, 2, F2)
    assert out["histogram"] == CENSUS_2_2_GF2
    assert out["population"] == 65536
    assert sum(c for v, c in out["histogram"].items() if v >= 2) > 65536 // 2


def test_census_sample_deterministic():
    a = ptrank_census(2, 2, F2, mode="sample", count=30, seed=5)
    b = ptrank_census(2, 2, F2, mode="sample", count=30, seed=5)
    assert a == b and a["evaluated"] == 30


def test_census_fully_symmetric_population():
    orbits = int(fully_symmetric_orbits(2, 2).max()) + 1
    out = ptrank_census(2, 2, F2, symmetry="fully-symmetric")
    assert out["population"] == 2**orbits == sum(out["histogram"].values())
    assert out["histogram"][0] == 1
