import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptrank.abpformula import (Leaf, OrderedABP, Plus, Times, abp_eval, abp_for_imm, abp_for_shifted,
                               abp_middle_cut, abp_to_pt_cert, formula_blocks, formula_eval, imm_formula,
                               leaves, main_theorem_check, random_formula)
from ptrank.fieldlinalg import GF, rank
from ptrank.ptcore import pt_rank_exact, verify_pt_certificate
from ptrank.tensorspace import HyperMatrix, imm_tensor, shifted_tensor

import oracles

F2, F3 = GF(2), GF(3)


def _naive_formula(f, p):
    """Polynomial as dict {((block, var), ...) sorted: coeff} by explicit expansion."""
    if isinstance(f, Leaf):
        return {((f.block, f.var),): f.scalar % p}
    if isinstance(f, Plus):
        out = {}
        for c in f.children:
            for k, v in _naive_formula(c, p).items():
                out[k] = (out.get(k, 0) + v) % p
        return out
    out = {(): 1}
    for c in f.children:
        nxt = {}
        for k1, v1 in out.items():
            for k2, v2 in _naive_formula(c, p).items():
                key = tuple(sorted(k1 + k2))
                nxt[key] = (nxt.get(key, 0) + v1 * v2) % p
        out = nxt
    return out


def _tensor_from_poly(poly, blocks, m):
    arr = np.zeros((m,) * len(blocks), dtype=np.int64)
    for key, v in poly.items():
        arr[tuple(var for _, var in key)] += v
    return arr


@pytest.mark.parametrize("n,d", [(1, 3), (2, 2), (2, 3), (3, 2)])
def test_imm_abp(n, d):
    abp = abp_for_imm(n, d, F3)
    assert abp_eval(abp) == imm_tensor(n, d, F3)
    assert abp.size == (d + 1) * n
    corner = abp_for_imm(n, d, F3, corner=True)
    assert abp_eval(corner) == imm_tensor(n, d, F3, corner=True)


def test_abp_eval_against_loop_oracle():
    rng = np.random.default_rng(2)
    widths, m = [2, 3, 1, 2], 3
    layers = [rng.integers(0, 3, size=(widths[i], widths[i + 1], m)) for i in range(3)]
    v1, v2 = rng.integers(0, 3, size=2), rng.integers(0, 3, size=2)
    T = abp_eval(OrderedABP(m, layers, v1, v2, F3))
    for xs in itertools.product(range(m), repeat=3):
        assert int(T.data[xs]) == oracles.abp_entry(layers, v1, v2, xs, 3)


def test_abp_trivial_cases():
    L = np.zeros((1, 1, 4), dtype=np.int64)
    L[0, 0, 2] = 1
    T = abp_eval(OrderedABP(4, [L, L], [1], [1], F2))
    assert int(np.count_nonzero(T.data)) == 1 and T.data[2, 2] == 1
    Z = abp_eval(OrderedABP(4, [L, L], [0], [1], F2))
    assert Z.is_zero()
    with pytest.raises(ValueError):
        OrderedABP(4, [np.zeros((2, 1, 4))], [1], [1], F2)


@settings(max_examples=10, deadline=None)
@given(d=st.integers(1, 3), seed=st.integers(0, 10**6))
def test_abp_for_shifted(d, seed):
    M = HyperMatrix.from_array(2, d, np.random.default_rng(seed).integers(0, 3, size=(2**d, 2**d)), F3)
    assert abp_eval(abp_for_shifted(M)) == shifted_tensor(M)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_middle_cut_of_imm(d):
    cut = abp_middle_cut(abp_for_imm(2, d, F2))
    assert cut.flattening_rank <= 2 <= cut.coarse_bound
    assert cut.cut == (d + 1) // 2


def test_middle_cut_rejects_wrong_target():
    M = HyperMatrix.identity(2, 2, F3)
    abp = abp_for_shifted(M)
    with pytest.raises(ValueError):
        abp_middle_cut(abp, HyperMatrix.zeros(2, 2, F3))


def test_middle_cut_restricts_shifted():
    M = HyperMatrix.identity(2, 2, F3)
    cut = abp_middle_cut(abp_for_shifted(M))
    assert cut.target == M and rank(cut.matrix) >= 1


@pytest.mark.parametrize("provider", ["builtin", "trivial"])
def test_pipeline_identity(provider):
    for F in ((F3,) if provider == "builtin" else (F2, F3)):     # composition identities need char != 2
        M = HyperMatrix.identity(2, 2, F)
        cert = abp_to_pt_cert(abp_for_imm(2, 3, F, corner=True), M, provider=provider)
        assert verify_pt_certificate(cert) == cert.value
        chain = cert.metadata["chain"]
        assert len(chain) == 6
        assert cert.value <= chain[3]["bound"]
        if F.p == 2:
            assert cert.value >= pt_rank_exact(M)[0] == 2


def test_pipeline_product_single_pair():
    # M = A (x) B makes the middle-cut matrix over (i1, j1) x (i2, j2) rank one
    A, B = np.array([[1, 2], [0, 1]]), np.array([[2, 0], [1, 1]])
    M = HyperMatrix.from_array(2, 2, np.kron(A, B), F3)
    cert = abp_to_pt_cert(abp_for_shifted(M), M, provider="trivial")
    assert cert.metadata["chain"][1]["pairs"] == 1
    assert verify_pt_certificate(cert) <= cert.metadata["chain"][2]["provider_value"]


def test_pipeline_random_and_errors():
    rng = np.random.default_rng(4)
    M = HyperMatrix.from_array(2, 4, rng.integers(0, 3, size=(16, 16)), F3)
    cert = abp_to_pt_cert(abp_for_shifted(M), M)
    assert verify_pt_certificate(cert) == cert.value
    with pytest.raises(ValueError):
        abp_to_pt_cert(abp_for_imm(2, 2, F3))            # even number of layers
    with pytest.raises(ValueError):
        abp_to_pt_cert(abp_for_shifted(HyperMatrix.identity(3, 2, F3)), provider="builtin")   # N = 3


def test_imm_formula():
    f = imm_formula(2, 2)
    assert leaves(f) == 8
    assert formula_eval(f, 4, F3) == imm_tensor(2, 2, F3)
    g = imm_formula(2, 2, corner=True)
    assert formula_eval(g, 4, F3) == imm_tensor(2, 2, F3, corner=True)


def test_formula_multilinearity_enforced():
    with pytest.raises(ValueError):
        formula_blocks(Times((Leaf(1, 0), Leaf(1, 1))))
    with pytest.raises(ValueError):
        formula_blocks(Plus((Leaf(1, 0), Leaf(2, 1))))


def test_formula_plus_negation_is_zero():
    a = Times((Leaf(1, 3), Leaf(2, 1, 2)))
    b = Times((Leaf(1, 3), Leaf(2, 1, -2)))
    assert formula_eval(Plus((a, b)), 4, F3).is_zero()


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), nb=st.integers(1, 3))
def test_formula_eval_matches_expansion(seed, nb):
    blocks = list(range(1, nb + 1))
    f = random_formula(blocks, 4, np.random.default_rng(seed), p=3)
    want = _tensor_from_poly(_naive_formula(f, 3), blocks, 4) % 3
    assert np.array_equal(formula_eval(f, 4, F3).data, want)


def test_main_theorem_imm():
    rep = main_theorem_check(imm_formula(2, 2, corner=True), 2, F2)
    assert not rep["violation"] and rep["leaves"] == 4
    assert rep["pt_rank"] == 2 and rep["d"] == 1
    zero = Plus((Times((Leaf(1, 0), Leaf(2, 0))), Times((Leaf(1, 0), Leaf(2, 0)))))
    rep0 = main_theorem_check(zero, 2, F2)
    assert rep0["bound"] == 0 and not rep0["violation"]


def test_main_theorem_random_harness():
    rng = np.random.default_rng(7)
    for t in range(50):
        blocks = [[1], [1, 2], [1, 3], [2, 3]][t % 4]
        f = random_formula(blocks, 4, rng, p=2, pin_ends=bool(t % 2))
        rep = main_theorem_check(f, 2, F2)
        assert rep["ell"] <= 2 and not rep["violation"], rep
