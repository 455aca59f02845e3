import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptrank.candidates import (build_wt, cauchy_T, check_parameters, contexts, cyclic_rank1_cert, cyclic_T,
                               dual_context_report, triangular_abp, triangular_flattening_check, triangular_T,
                               unit_rescale, wt_kappa_rank_scan, wt_lambda_flatten_rank)
from ptrank.abpformula import abp_eval
from ptrank.fieldlinalg import ComplexField, CyclotomicField, kron, rank
from ptrank.ptcore import partial_transpose
from ptrank.tensorspace import shifted_tensor

import oracles


def _naive_wt(T, n, ctx):
    d = len(T)
    q, w = ctx.p, ctx.omega
    out = []
    for i in itertools.product(range(n), repeat=d):
        row = []
        for j in itertools.product(range(n), repeat=d):
            e = sum(i[a] * T[a][b] * j[b] for a in range(d) for b in range(d))
            row.append(pow(w, e % n, q))
        out.append(row)
    return out


def test_parameter_policy():
    check_parameters(5, 2)
    for n, d in [(5, 3), (9, 2), (3, 2)]:
        with pytest.raises(ValueError):
            check_parameters(n, d)
    check_parameters(3, 3, relax=True)


def test_contexts():
    ctxs = contexts(5)
    assert isinstance(ctxs[0], ComplexField) and len(ctxs) == 3
    assert ctxs[1].p != ctxs[2].p and all(c.p > 2**20 for c in ctxs[1:])


@pytest.mark.parametrize("T", [[[1, 0], [0, 1]], [[0, 1], [1, 0]], [[1, 1], [0, 1]], [[3, 4], [2, 3]]])
def test_build_wt_matches_naive(T):
    ctx = CyclotomicField.for_order(5)[0]
    W = build_wt(T, 5, ctx)
    assert W.data.tolist() == _naive_wt(T, 5, ctx)


def test_identity_T_is_kronecker_of_dft():
    for ctx in contexts(3):
        W = build_wt(np.eye(2, dtype=int), 3, ctx)
        F1 = build_wt([[1]], 3, ctx).body
        assert W.body == kron(F1, F1)


def test_cauchy_T():
    T = cauchy_T(2, 5)
    assert np.all(T % 5 != 0)
    assert (T[0, 0] * T[1, 1] - T[0, 1] * T[1, 0]) % 5 != 0
    for a in range(2):
        for b in range(2):
            assert (T[a, b] * (a - (2 + b))) % 5 == 1
    with pytest.raises(ValueError):
        cauchy_T(2, 4)
    with pytest.raises(ValueError):
        cauchy_T(3, 5)


def test_cauchy_full_rank_everywhere():
    rep = dual_context_report(cauchy_T(2, 5), 5)
    assert rep["agree"]
    for c in rep["contexts"]:
        assert set(c["kappa_ranks"].values()) == {25}
        assert c["lambda_ranks"][(1,)] == 25 == c["lambda_ranks"][(2,)]


@pytest.mark.parametrize("n,d", [(3, 2), (5, 2), (3, 4)])
def test_cyclic_rank_one(n, d):
    for ctx in contexts(n):
        kappa, u, v = cyclic_rank1_cert(n, d, ctx)
        W = build_wt(cyclic_T(d), n, ctx)
        assert rank(partial_transpose(W, kappa).body) == 1
        if isinstance(ctx, ComplexField):
            assert np.allclose(np.abs(u), 1) and np.allclose(np.abs(v), 1)


def test_cyclic_scan():
    for ctx in contexts(5):
        scan = wt_kappa_rank_scan(build_wt(cyclic_T(2), 5, ctx))
        assert scan[(1,)] == scan[(2,)] == 1 and scan[()] == scan[(1, 2)] == 25


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_scan_transpose_duality_and_unit_rescale(seed):
    rng = np.random.default_rng(seed)
    T = rng.integers(0, 5, size=(2, 2))
    ctx = CyclotomicField.for_order(5)[1]
    W = build_wt(T, 5, ctx)
    scan = wt_kappa_rank_scan(W)
    for k, r in scan.items():
        assert r == scan[tuple(x for x in (1, 2) if x not in k)]
    assert wt_kappa_rank_scan(unit_rescale(W, rng)) == scan


def test_lambda_rank_against_oracle():
    ctx = CyclotomicField.for_order(5)[0]
    W = build_wt(cauchy_T(2, 5), 5, ctx)
    B = W.blocks()                                   # (i1, i2, j1, j2)
    rows = B.transpose(0, 2, 1, 3).reshape(25, 25)   # (i1, j1) x (i2, j2)
    assert wt_lambda_flatten_rank(W, (1,)) == oracles.rank_mod_p(rows.tolist(), ctx.p) == 25


@pytest.mark.parametrize("n", [3, 5])
def test_triangular_check(n):
    ctx = CyclotomicField.for_order(n)[0]
    rep = triangular_flattening_check(n, 2, ctx)
    assert rep["ok"] and rep["rank"] <= n * n and rep["abp_matches"] and rep["abp_width"] == n
    assert abp_eval(triangular_abp(n, 2, ctx)) == shifted_tensor(build_wt(triangular_T(2), n, ctx))
    assert rep["pt_certificate_value"] is None            # no built-in provider for coarse size n


def test_complex_rank_confirmed_modular():
    for T in (cyclic_T(2), triangular_T(2), cauchy_T(2, 5)):
        assert dual_context_report(T, 5)["agree"]


def test_build_wt_rejects_non_square():
    with pytest.raises(ValueError):
        build_wt([[1, 2, 3]], 5, contexts(5)[1])
