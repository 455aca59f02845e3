import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from ptrank.fieldlinalg import (ComplexField, CyclotomicField, FieldMismatch, GF, Matrix, PrimeField,
                                RationalField, batch_rank, kron, random_nonsingular, rank,
                                rank_factorization)

from oracles import rank_mod_p, rank_rational


def _rng(seed=0):
    return np.random.default_rng(seed)


def test_prime_field_rejects_composite():
    with pytest.raises(ValueError):
        PrimeField(4)


def test_cyclotomic_contexts_have_requested_order():
    for n in (3, 5, 7):
        for ctx in CyclotomicField.for_order(n):
            assert (ctx.p - 1) % n == 0
            assert pow(ctx.omega, n, ctx.p) == 1
            assert all(pow(ctx.omega, k, ctx.p) != 1 for k in range(1, n))


def test_cyclotomic_rejects_wrong_order():
    with pytest.raises(ValueError):
        CyclotomicField(7, 3, 6)   # 6 has order 2 mod 7


def test_identity_rank():
    for F in (GF(2), GF(3), ComplexField(), RationalField()):
        assert rank(Matrix(F.eye(5), F)) == 5


def test_field_mismatch():
    with pytest.raises(FieldMismatch):
        Matrix(np.eye(2), GF(2)) + Matrix(np.eye(2), GF(3))


@settings(max_examples=60, deadline=None)
@given(p=st.sampled_from([2, 3, 5, 7]), r=st.integers(1, 7), c=st.integers(1, 7), seed=st.integers(0, 10**6))
def test_rank_matches_oracle(p, r, c, seed):
    a = _rng(seed).integers(0, p, size=(r, c))
    assert rank(a, GF(p)) == rank_mod_p(a.tolist(), p)


def test_large_prime_rank_matches_oracle():
    F = CyclotomicField.for_order(5)[0]
    a = _rng(3).integers(0, F.p, size=(6, 9))
    a[5] = (a[0] + 2 * a[1]) % F.p
    assert rank(a, F) == rank_mod_p(a.tolist(), F.p) == 5


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_rational_rank_matches_oracle(seed):
    a = _rng(seed).integers(-3, 4, size=(4, 5))
    a[3] = a[0] - a[1]
    assert rank(a, RationalField()) == rank_rational(a.tolist())


def test_complex_rank_with_tolerance():
    F = ComplexField(1e-9)
    v = np.exp(2j * np.pi * np.arange(4) / 4)
    assert rank(np.outer(v, v.conj()), F) == 1
    assert rank(np.outer(v, v) + 1e-13, F) == 1


@settings(max_examples=30, deadline=None)
@given(p=st.sampled_from([2, 3, 5]), seed=st.integers(0, 10**6))
def test_batch_rank_matches_single(p, seed):
    a = _rng(seed).integers(0, p, size=(20, 4, 4))
    assert batch_rank(a, GF(p)).tolist() == [rank_mod_p(m.tolist(), p) for m in a]


@settings(max_examples=30, deadline=None)
@given(p=st.sampled_from([2, 3, 5]), seed=st.integers(0, 10**6))
def test_rank_factorization_reassembles(p, seed):
    F = GF(p)
    a = _rng(seed).integers(0, p, size=(4, 3)) @ _rng(seed + 1).integers(0, p, size=(3, 5))
    M = Matrix(a, F)
    terms = rank_factorization(M)
    assert len(terms) == rank(M)
    total = sum((np.multiply.outer(u, v) for u, v in terms), np.zeros((4, 5), dtype=np.int64))
    assert F.equal(F.reduce(total), M.data)


def test_rank_factorization_rational():
    F = RationalField()
    M = Matrix([[1, 2], [2, 4], [Fraction(1, 2), 1]], F)
    (u, v), = rank_factorization(M)
    assert np.all(np.multiply.outer(u, v) == M.data)


def test_kron_rank_multiplies():
    F = GF(3)
    A = random_nonsingular(3, F, seed=1)
    B = Matrix([[1, 1], [1, 1]], F)
    assert rank(kron(A, B)) == 3


def test_random_nonsingular_is_seeded():
    F = GF(5)
    assert random_nonsingular(4, F, seed=9) == random_nonsingular(4, F, seed=9)
    assert rank(random_nonsingular(4, F, seed=9)) == 4
