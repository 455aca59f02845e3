import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptrank.fieldlinalg import GF
from ptrank.ptcore import BudgetExceeded, example_identity_certificate, pt_rank_exact, verify_pt_certificate
from ptrank.pathmeasures import (Orientation, PathGraph, dimension_exponent, gamma_delta_pm, graph_analyze,
                                 lemma_suite, orientations, padded_decomposition, relrk, relrk_path,
                                 rho_exact, rho_from_decomposition, rho_padded, rho_pt_identity_check)
from ptrank.tensorspace import HyperMatrix, Tensor, padded_tensor, tensor_product

import oracles

F2, F3 = GF(2), GF(3)


def _tensor(G, n, F, seed):
    data = np.random.default_rng(seed).integers(0, F.p, size=(n,) * len(G.D))
    return Tensor(n, G.D, data, F)


def _naive_relrk(A, G, alpha, gamma):
    """Flatten by looping over index tuples, then eliminate."""
    D1 = set(G.D1)
    I = [lab for lab in A.labels if lab in alpha.I or (lab in D1 and lab in gamma.I)]
    J = [lab for lab in A.labels if lab not in I]
    pos = {lab: k for k, lab in enumerate(A.labels)}
    rows = []
    for x in itertools.product(range(A.n), repeat=len(I)):
        row = []
        for y in itertools.product(range(A.n), repeat=len(J)):
            idx = [0] * len(A.labels)
            for lab, v in zip(I, x):
                idx[pos[lab]] = v
            for lab, v in zip(J, y):
                idx[pos[lab]] = v
            row.append(int(A.data[tuple(idx)]))
        rows.append(row)
    return Fraction(oracles.rank_mod_p(rows, A.field.p), A.n ** len(G.edges))


def test_graph_analyze():
    g = graph_analyze(PathGraph([1]))
    assert len(g["V1"]) == 2 and not g["V2"] and g["ell"] == 1
    for d in (2, 3, 5):
        g = graph_analyze(PathGraph(range(1, d + 1)))
        assert len(g["V1"]) == 2 and len(g["V2"]) == d - 1 and g["ell"] == d
        assert len(g["D1"]) == 2 and len(g["D2"]) == 2 * (d - 1)
    g = graph_analyze(PathGraph([1, 3]))
    assert len(g["components"]) == 2 and g["ell"] == 1
    with pytest.raises(ValueError):
        PathGraph([])


def test_orientations():
    assert len(orientations(())) == 1
    assert len(orientations((1, 2, 3))) == 8
    a, b = Orientation((1,), 1), Orientation((4, 5), 2)
    u = a | b
    assert u.S == (1, 4, 5) and u.restrict((1,)) == a and u.restrict((4, 5)) == b
    for o in orientations((2, 3)):
        assert len(o.I) == len(o.J) == 2 and not (o.I & o.J)
        assert Orientation.from_sets(o.S, o.I) == o
    with pytest.raises(ValueError):
        a | Orientation((1,), 0)


def test_gamma_plus_minus():
    G = PathGraph([1])
    plus, minus = gamma_delta_pm(G)
    assert set(plus.I) & set(G.D1) == set(G.D1)
    assert set(minus.J) & set(G.D1) == set(G.D1)
    G = PathGraph([2, 3, 4])
    plus, _ = gamma_delta_pm(G)
    assert set(G.D1) <= set(plus.I)


def test_delta_plus_minus():
    G, H = PathGraph([1]), PathGraph([2])
    plus, minus = gamma_delta_pm(G, H)
    assert plus.S == (1,)
    assert (1, 2) in plus.I and (1, 0) in plus.J
    assert (1, 0) in minus.I and (1, 2) in minus.J
    plus, minus = gamma_delta_pm(PathGraph([1]), PathGraph([5]))
    assert plus.S == () == minus.S
    with pytest.raises(ValueError):
        gamma_delta_pm(G, G)


def test_relrk_single_edge_identity():
    G = PathGraph([1])
    A = Tensor(2, G.D, np.eye(2, dtype=int), F2)
    alpha = Orientation(())
    vals = {g.bits: relrk(A, G, alpha, g).value for g in orientations(G.V1)}
    # bits 0 / 3 split the two directed edges, bits 1 / 2 put both on one side
    assert vals == {0: 1, 1: Fraction(1, 2), 2: Fraction(1, 2), 3: 1}
    Z = Tensor.zeros(2, G.D, F2)
    assert all(relrk(Z, G, alpha, g).value == 0 for g in orientations(G.V1))


@settings(max_examples=40, deadline=None)
@given(edges=st.sampled_from([(1,), (1, 2), (1, 2, 3), (1, 3), (2, 3)]), seed=st.integers(0, 10**6), data=st.data())
def test_relrk_matches_naive(edges, seed, data):
    G = PathGraph(edges)
    A = _tensor(G, 2, F3, seed)
    alpha = data.draw(st.sampled_from(orientations(G.V2)))
    gamma = data.draw(st.sampled_from(orientations(G.V1)))
    r = relrk(A, G, alpha, gamma)
    assert r.value == _naive_relrk(A, G, alpha, gamma)
    assert r.value <= Fraction(2) ** dimension_exponent(G, alpha, gamma)


@settings(max_examples=30, deadline=None)
@given(d=st.integers(1, 3), seed=st.integers(0, 10**6), data=st.data())
def test_relrk_path_agrees_with_graph_form(d, seed, data):
    G = PathGraph(range(1, d + 1))
    A = _tensor(G, 2, F3, seed)
    alpha = data.draw(st.sampled_from(orientations(G.V2)))
    gamma = data.draw(st.sampled_from(orientations(G.V1)))
    bits = tuple(alpha.bit(v) for v in G.V2)
    # the left end contributes (v0, v1) with label index 1 when a = 1; the right end (v_d, v_{d-1}) when b = 1
    a = 1 if (0, 1) in gamma.I else 0
    b = 0 if (d, d - 1) in gamma.I else 1
    assert relrk_path(A, a, bits, b).value == relrk(A, G, alpha, gamma).value


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), data=st.data())
def test_relrk_subadditive_and_multiplicative(seed, data):
    G, H = PathGraph([1, 2]), PathGraph([4])
    A1, A2 = _tensor(G, 2, F3, seed), _tensor(G, 2, F3, seed + 1)
    B = _tensor(H, 2, F3, seed + 2)
    al = data.draw(st.sampled_from(orientations(G.V2)))
    ga = data.draw(st.sampled_from(orientations(G.V1)))
    gb = data.draw(st.sampled_from(orientations(H.V1)))
    assert relrk(A1 + A2, G, al, ga).value <= relrk(A1, G, al, ga).value + relrk(A2, G, al, ga).value
    U = G.union(H)
    AB = tensor_product(A1, B)
    lhs = relrk(AB, U, al, ga | gb).value
    assert lhs == relrk(A1, G, al, ga).value * relrk(B, H, Orientation(()), gb).value


def test_rho_exact_single_edge_identity():
    G = PathGraph([1])
    A = Tensor(2, G.D, np.eye(2, dtype=int), F2)
    assert rho_exact(A, G).value == 1
    assert rho_exact(Tensor.zeros(2, G.D, F2), G).value == 0


def test_rho_exact_length_two_path_against_restricted_search():
    # unrestricted search over 2^16 splits agrees with the slice-restricted search and with rank / n^2
    for seed in range(3):
        M = HyperMatrix.from_array(2, 1, np.random.default_rng(seed).integers(0, 2, size=(2, 2)), F2)
        A = padded_tensor(M)
        full = rho_exact(A, PathGraph([1, 2]))
        assert full.enumerated == 2**16
        assert full.value == rho_padded(A).value == Fraction(oracles.rank_mod_p(M.data.tolist(), 2), 4)


def test_rho_budget():
    G = PathGraph([1, 2, 3])
    with pytest.raises(BudgetExceeded):
        rho_exact(_tensor(G, 2, F2, 0), G, budget=1000)


def test_rho_from_decomposition_upper_bounds_exact():
    G = PathGraph([1, 2])
    A = _tensor(G, 2, F2, 4)
    alphas = orientations(G.V2)
    X0 = _tensor(G, 2, F2, 5)
    dec = {alphas[0]: X0, alphas[1]: A - X0}
    assert rho_from_decomposition(A, G, dec) >= rho_exact(A, G).value
    with pytest.raises(ValueError):
        rho_from_decomposition(A, G, {alphas[0]: X0})


def test_padded_decomposition_reproduces_certificate():
    cert = example_identity_certificate(F2)
    A, G, dec = padded_decomposition(cert)
    assert rho_from_decomposition(A, G, dec) * 2**3 == verify_pt_certificate(cert) == 2


def test_rho_pt_identity_d1_all_matrices():
    for code in range(16):
        M = HyperMatrix.from_array(2, 1, [(code >> k) & 1 for k in range(4)], F2)
        rep = rho_pt_identity_check(M, restricted=False)
        assert rep["equal"], rep


def test_rho_pt_identity_d2():
    assert rho_pt_identity_check(HyperMatrix.zeros(2, 2, F2))["pt_rank"] == 0
    rng = np.random.default_rng(11)
    for _ in range(5):
        M = HyperMatrix.from_array(2, 2, rng.integers(0, 2, size=(4, 4)), F2)
        rep = rho_pt_identity_check(M)
        assert rep["equal"] and rep["pt_rank"] == pt_rank_exact(M)[0]


def test_lemma_suite_small_run():
    reports = lemma_suite(seed=3, trials=12)
    names = {r["lemma"] for r in reports}
    assert {"relrk-subadd", "relrk-mult", "relrk-mult2", "rho-subadd", "rho-tensor", "deficit"} <= names
    for r in reports:
        if r["lemma"] != "deficit2-literal":
            assert r["failures"] == 0, r
        assert r["trials"] > 0
