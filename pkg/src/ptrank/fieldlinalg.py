"""Field contexts and dense exact linear algebra.

Four kinds of field are supported:

* ``PrimeField(p)`` -- GF(p), entries are int64 residues.  GF(2) ranks use
  bit-packed rows.
* ``CyclotomicField(q, n, omega)`` -- GF(q) together with a chosen element of
  multiplicative order ``n``.  Used as an exact stand-in for Q(zeta_n).
* ``ComplexField(eps)`` -- complex128 entries with a relative pivot tolerance.
* ``RationalField()`` -- exact Q via :class:`fractions.Fraction` object arrays.
  Intended for small verification instances only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from sympy import isprime, n_order
from sympy.ntheory.residue_ntheory import sqrt_mod

__all__ = [
    "Field", "PrimeField", "CyclotomicField", "ComplexField", "RationalField",
    "GF", "Matrix", "FieldMismatch",
    "rank", "batch_rank", "kron", "gram_factor", "random_nonsingular",
    "rank_factorization", "identity", "zeros",
]


class FieldMismatch(ValueError):
    """Operands live in different field contexts."""


class Field:
    """Base class for field contexts.  Subclasses are immutable and hashable."""

    characteristic: int = 0
    is_finite: bool = False
    dtype: object = object

    def reduce(self, a):
        """Bring an array (or scalar) to canonical representatives."""
        return a

    def elements(self, values) -> np.ndarray:
        return self.reduce(np.asarray(values, dtype=self.dtype))

    def zeros(self, shape) -> np.ndarray:
        return np.zeros(shape, dtype=self.dtype)

    def ones(self, shape) -> np.ndarray:
        return self.elements(np.ones(shape, dtype=np.int64))

    def eye(self, n: int) -> np.ndarray:
        return self.elements(np.eye(n, dtype=np.int64))

    def scalar(self, x):
        return self.elements(np.asarray([x]))[0]

    def inv(self, x):
        raise NotImplementedError

    def matmul(self, a, b):
        return self.reduce(a @ b)

    def is_zero(self, a) -> bool:
        return not np.any(np.asarray(a) != 0)

    def equal(self, a, b) -> bool:
        a, b = np.asarray(a), np.asarray(b)
        return a.shape == b.shape and self.is_zero(self.reduce(a - b))

    def nonzero_mask(self, a) -> np.ndarray:
        return np.asarray(a) != 0

    def sqrt(self, x):
        """Square root of a scalar, or ``None`` if ``x`` is not a square."""
        raise NotImplementedError

    def root_of_unity(self, n: int):
        raise ValueError(f"{self} has no designated root of unity of order {n}")

    def random(self, rng: np.random.Generator, shape) -> np.ndarray:
        raise ValueError(f"cannot sample uniformly from {self}")


@dataclass(frozen=True)
class PrimeField(Field):
    """GF(p) with int64 residues."""

    p: int

    def __post_init__(self):
        if not isprime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.p >= 2**31:
            raise ValueError("prime too large for int64 residues")

    is_finite = True
    dtype = np.int64

    @property
    def characteristic(self) -> int:
        return self.p

    @property
    def order(self) -> int:
        return self.p

    @cached_property
    def _inverse_table(self):
        if self.p > 1 << 16:
            return None
        table = np.zeros(self.p, dtype=np.int64)
        for x in range(1, self.p):
            table[x] = pow(x, -1, self.p)
        return table

    def reduce(self, a):
        return np.mod(a, self.p)

    def inv(self, x):
        x = int(x) % self.p
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(x, -1, self.p)

    def inv_array(self, a: np.ndarray) -> np.ndarray:
        table = self._inverse_table
        if table is not None:
            return table[a]
        return np.array([pow(int(x), -1, self.p) if x else 0 for x in a.ravel()],
                        dtype=np.int64).reshape(a.shape)

    def matmul(self, a, b):
        a, b = np.asarray(a), np.asarray(b)
        inner = a.shape[-1] if a.ndim else 1
        if inner * (self.p - 1) ** 2 < 2**62:
            return np.mod(a @ b, self.p)
        out = np.asarray(a, dtype=object) @ np.asarray(b, dtype=object)
        return np.mod(out, self.p).astype(np.int64)

    def sqrt(self, x):
        x = int(x) % self.p
        if x == 0:
            return 0
        if self.p == 2:
            return x
        r = sqrt_mod(x, self.p)
        return None if r is None else int(r)

    def random(self, rng, shape):
        return rng.integers(0, self.p, size=shape, dtype=np.int64)

    def __str__(self):
        return f"GF({self.p})"


@dataclass(frozen=True)
class CyclotomicField(PrimeField):
    """GF(q) with a distinguished element ``omega`` of multiplicative order ``n``."""

    p: int
    n: int = 1
    omega: int = 1

    def __post_init__(self):
        super().__post_init__()
        if (self.p - 1) % self.n:
            raise ValueError(f"{self.n} does not divide q-1 = {self.p - 1}")
        w = self.omega % self.p
        if w == 0 or n_order(w, self.p) != self.n:
            raise ValueError(f"{self.omega} does not have order {self.n} mod {self.p}")

    @property
    def q(self) -> int:
        return self.p

    @classmethod
    def for_order(cls, n: int, above: int = 2**20, count: int = 2) -> list["CyclotomicField"]:
        """The ``count`` smallest primes q = 1 (mod n) with q > ``above``.

        ``omega`` is g^((q-1)/n) for the least primitive root g.
        """
        from sympy import primitive_root

        out = []
        q = above + 1
        q += (1 - q) % n
        while len(out) < count:
            if isprime(q):
                g = int(primitive_root(q))
                out.append(cls(q, n, pow(g, (q - 1) // n, q)))
            q += n
        return out

    def root_of_unity(self, n: int):
        if n != self.n:
            raise ValueError(f"context carries a root of order {self.n}, not {n}")
        return self.omega

    def __str__(self):
        return f"GF({self.p})[omega={self.omega}, order {self.n}]"


@dataclass(frozen=True)
class ComplexField(Field):
    """Double-precision complex numbers; ``eps`` is the relative pivot tolerance."""

    eps: float = 1e-9

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    dtype = np.complex128

    def inv(self, x):
        return 1 / complex(x)

    def _tol(self, *arrays) -> float:
        scale = max((float(np.abs(a).max()) for a in arrays if np.size(a)), default=0.0)
        return self.eps * max(scale, 1.0)

    def is_zero(self, a) -> bool:
        a = np.asarray(a)
        return not a.size or float(np.abs(a).max()) <= self.eps

    def equal(self, a, b) -> bool:
        a, b = np.asarray(a), np.asarray(b)
        if a.shape != b.shape:
            return False
        if not a.size:
            return True
        return float(np.abs(a - b).max()) <= self._tol(a, b)

    def nonzero_mask(self, a):
        a = np.asarray(a)
        return np.abs(a) > self._tol(a)

    def sqrt(self, x):
        return complex(np.sqrt(complex(x)))

    def root_of_unity(self, n: int):
        return complex(np.exp(2j * np.pi / n))

    def random(self, rng, shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)).astype(np.complex128)

    def __str__(self):
        return f"C(eps={self.eps:g})"


@dataclass(frozen=True)
class RationalField(Field):
    """Exact rationals.  Small matrices only."""

    dtype = object

    def elements(self, values):
        arr = np.asarray(values, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        for idx, v in np.ndenumerate(arr):
            out[idx] = v if isinstance(v, Fraction) else Fraction(v)
        return out

    def zeros(self, shape):
        return self.elements(np.zeros(shape, dtype=np.int64))

    def inv(self, x):
        return 1 / Fraction(x)

    def sqrt(self, x):
        x = Fraction(x)
        if x < 0:
            return None
        from math import isqrt

        a, b = isqrt(x.numerator), isqrt(x.denominator)
        return Fraction(a, b) if a * a == x.numerator and b * b == x.denominator else None

    def __str__(self):
        return "Q"


def GF(p: int) -> PrimeField:
    return PrimeField(p)


# --------------------------------------------------------------------------
# Matrices


class Matrix:
    """Dense matrix over a field context.  Treated as immutable."""

    __slots__ = ("data", "field")

    def __init__(self, data, field: Field):
        arr = field.elements(data)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-d array, got shape {arr.shape}")
        arr.flags.writeable = False
        self.data = arr
        self.field = field

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    @property
    def T(self) -> "Matrix":
        return Matrix(self.data.T, self.field)

    def _check(self, other: "Matrix"):
        if other.field != self.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")

    def __add__(self, other):
        self._check(other)
        return Matrix(self.field.reduce(self.data + other.data), self.field)

    def __sub__(self, other):
        self._check(other)
        return Matrix(self.field.reduce(self.data - other.data), self.field)

    def __neg__(self):
        return Matrix(self.field.reduce(-self.data), self.field)

    def __matmul__(self, other):
        self._check(other)
        return Matrix(self.field.matmul(self.data, other.data), self.field)

    def scale(self, c) -> "Matrix":
        return Matrix(self.field.reduce(self.data * c), self.field)

    def is_zero(self) -> bool:
        return self.field.is_zero(self.data)

    def __eq__(self, other):
        if not isinstance(other, Matrix) or other.field != self.field:
            return NotImplemented
        return self.field.equal(self.data, other.data)

    __hash__ = None

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols} over {self.field})"


def identity(n: int, field: Field) -> Matrix:
    return Matrix(field.eye(n), field)


def zeros(rows: int, cols: int, field: Field) -> Matrix:
    return Matrix(field.zeros((rows, cols)), field)


# --------------------------------------------------------------------------
# Rank


def _rank_gf2(a: np.ndarray) -> int:
    # rows packed into Python ints; XOR elimination is word parallel
    if a.shape[1] <= 62:
        weights = np.left_shift(np.int64(1), np.arange(a.shape[1], dtype=np.int64))
        rows = [int(x) for x in (a.astype(np.int64) @ weights)]
    else:
        rows = [int("".join("1" if x else "0" for x in row), 2) for row in a]
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top in basis:
                v ^= basis[top]
            else:
                basis[top] = v
                break
    return len(basis)


def _rank_modp(a: np.ndarray, field: PrimeField) -> int:
    p = field.p
    m = np.array(a, dtype=np.int64, copy=True)
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        m[r] = m[r] * field.inv(m[r, c]) % p
        below = m[r + 1:, c]
        hit = np.flatnonzero(below)
        if hit.size:
            idx = r + 1 + hit
            m[idx] = (m[idx] - np.outer(m[idx, c], m[r])) % p
        r += 1
    return r


def _rank_complex(a: np.ndarray, eps: float) -> int:
    m = np.array(a, dtype=np.complex128, copy=True)
    rows, cols = m.shape
    if not m.size:
        return 0
    tol = eps * float(np.abs(m).max())
    if tol == 0:
        return 0
    r = 0
    for c in range(cols):
        if r == rows:
            break
        col = np.abs(m[r:, c])
        piv = r + int(np.argmax(col))
        if abs(m[piv, c]) <= tol:
            continue
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        factors = m[r + 1:, c] / m[r, c]
        m[r + 1:] -= np.outer(factors, m[r])
        r += 1
    return r


def _rank_rational(a: np.ndarray) -> int:
    m = [list(row) for row in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        for i in range(r + 1, rows):
            if m[i][c] != 0:
                f = m[i][c] / pv
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == rows:
            break
    return r


def rank(M: Matrix | np.ndarray, field: Field | None = None) -> int:
    """Rank of a matrix.

    Over :class:`ComplexField` the rank is the number of pivots in partially
    pivoted elimination whose modulus exceeds ``eps * max|initial entry|``.
    """
    if isinstance(M, Matrix):
        a, field = M.data, M.field
    else:
        a = field.elements(M)
    if a.ndim != 2 or 0 in a.shape:
        return 0
    if isinstance(field, PrimeField):
        if field.p == 2:
            return _rank_gf2(a)
        return _rank_modp(a, field)
    if isinstance(field, ComplexField):
        return _rank_complex(a, field.eps)
    return _rank_rational(a)


def _batch_rank_gf2(a: np.ndarray) -> np.ndarray:
    B, r, c = a.shape
    weights = np.left_shift(np.uint64(1), np.arange(c, dtype=np.uint64))
    packed = (a.astype(np.uint64) * weights).sum(axis=2, dtype=np.uint64)
    return batch_rank_gf2_packed(packed, c)


def batch_rank_gf2_packed(rows: np.ndarray, cols: int) -> np.ndarray:
    """GF(2) ranks of a batch of matrices with rows packed as uint64 bitmasks.

    Args:
        rows: array of shape (B, r); bit ``k`` of ``rows[b, i]`` is entry (i, k).
        cols: number of columns (at most 64).
    """
    B, r = rows.shape
    basis = np.zeros((B, cols), dtype=np.uint64)
    rank_out = np.zeros(B, dtype=np.int64)
    one = np.uint64(1)
    for i in range(r):
        v = rows[:, i].copy()
        for col in range(cols):
            bit = (v >> np.uint64(col)) & one
            v ^= basis[:, col] * bit
        hit = np.flatnonzero(v)
        if hit.size:
            vv = v[hit]
            low = vv & (~vv + one)
            lead = np.log2(low.astype(np.float64)).astype(np.int64)
            basis[hit, lead] = vv
            rank_out[hit] += 1
    return rank_out


def _batch_rank_modp(a: np.ndarray, field: PrimeField) -> np.ndarray:
    p = field.p
    B, r, c = a.shape
    basis = np.zeros((B, c, c), dtype=np.int64)
    rank_out = np.zeros(B, dtype=np.int64)
    for i in range(r):
        v = a[:, i, :].astype(np.int64, copy=True)
        for col in range(c):
            coef = v[:, col]
            if not coef.any():
                continue
            v -= coef[:, None] * basis[:, col, :]
            np.mod(v, p, out=v)
        nz = v != 0
        hit = np.flatnonzero(nz.any(axis=1))
        if hit.size:
            lead = nz[hit].argmax(axis=1)
            vv = v[hit]
            vv = vv * field.inv_array(vv[np.arange(hit.size), lead])[:, None] % p
            basis[hit, lead, :] = vv
            rank_out[hit] += 1
    return rank_out


def batch_rank(a: np.ndarray, field: Field) -> np.ndarray:
    """Ranks of a stack of matrices of shape (B, r, c) over a finite field."""
    a = np.asarray(a)
    if not isinstance(field, PrimeField):
        return np.array([rank(m, field) for m in a], dtype=np.int64)
    if a.ndim != 3:
        raise ValueError("expected a (B, r, c) stack")
    if a.shape[2] > a.shape[1]:
        a = a.transpose(0, 2, 1)
    if 0 in a.shape[1:]:
        return np.zeros(a.shape[0], dtype=np.int64)
    if field.p == 2 and a.shape[2] <= 64:
        return _batch_rank_gf2(a)
    return _batch_rank_modp(a, field)


# --------------------------------------------------------------------------
# Products and factorizations


def kron(A: Matrix, B: Matrix) -> Matrix:
    """Kronecker product A (x) B."""
    A._check(B)
    return Matrix(A.field.reduce(np.kron(A.data, B.data)), A.field)


def rank_factorization(M: Matrix) -> list[tuple[np.ndarray, np.ndarray]]:
    """Write M as a sum of rank(M) outer products ``u v^T``.

    Finite and rational fields only (exact elimination).
    """
    field = M.field
    if isinstance(field, ComplexField):
        raise ValueError("exact factorization needs an exact field")
    R = np.array(M.data, copy=True)
    terms = []
    while True:
        nz = np.argwhere(field.nonzero_mask(R))
        if not nz.size:
            break
        i, j = nz[0]
        pivot_inv = field.inv(R[i, j])
        u = field.reduce(R[:, j] * pivot_inv)
        v = np.array(R[i, :], copy=True)
        terms.append((u, v))
        R = field.reduce(R - np.multiply.outer(u, v))
    return terms


def _sum_of_two_squares(field: Field, x):
    for a in range(field.p if isinstance(field, PrimeField) else 0):
        b = field.sqrt(field.reduce(x - a * a))
        if b is not None:
            return a, b
    raise ValueError(f"{x} is not a sum of two squares in {field}")


def gram_factor(S: Matrix) -> tuple[Matrix, dict]:
    """Find L with ``L^T L = S`` for a symmetric S (characteristic != 2).

    Symmetric rank-one peeling: with a vector x such that ``x^T S x != 0``,
    ``S - (Sx)(Sx)^T / (x^T S x)`` has rank one less.  A zero diagonal with a
    nonzero off-diagonal entry (i, j) is handled with x = e_i + e_j.  Each peeled
    term ``c w w^T`` contributes one row ``sqrt(c) w`` when c is a square and two
    rows ``a w, b w`` with ``a^2 + b^2 = c`` otherwise.

    Returns:
        (L, info) where info records the rank of S and the achieved row count.
    """
    field = S.field
    if field.characteristic == 2:
        raise ValueError("Gram factorization needs characteristic != 2")
    if S.rows != S.cols or not field.equal(S.data, S.data.T):
        raise ValueError("matrix is not symmetric")
    N = S.rows
    R = np.array(S.data, copy=True)
    rows = []
    pivots = 0
    split = 0
    while not field.is_zero(R):
        mask = field.nonzero_mask(R)
        diag = np.flatnonzero(np.diag(mask))
        x = field.zeros(N)
        if diag.size:
            if isinstance(field, ComplexField):
                k = int(np.argmax(np.abs(np.diag(R))))
            else:
                k = int(diag[0])
            x[k] = field.scalar(1)
        else:
            i, j = np.argwhere(mask)[0]
            x[i] = field.scalar(1)
            x[j] = field.scalar(1)
        Sx = field.matmul(R, x)
        c = field.matmul(x, Sx)
        c_inv = field.inv(c)
        R = field.reduce(R - np.multiply.outer(Sx, Sx) * c_inv)
        w = field.reduce(Sx * c_inv)
        pivots += 1
        root = field.sqrt(c)
        if root is not None:
            rows.append(field.reduce(w * root))
        else:
            a, b = _sum_of_two_squares(field, c)
            rows.append(field.reduce(w * a))
            rows.append(field.reduce(w * b))
            split += 1
        if pivots > N:
            raise ArithmeticError("Gram peeling did not terminate")
    L = Matrix(np.array(rows, dtype=field.dtype).reshape(len(rows), N), field)
    info = {"rank": pivots, "rows": len(rows), "split_pivots": split}
    return L, info


def random_nonsingular(n: int, field: Field, seed=None) -> Matrix:
    """Uniform nonsingular n x n matrix over a finite field (rejection sampling)."""
    if not field.is_finite:
        raise ValueError("random_nonsingular needs a finite field")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    while True:
        a = field.random(rng, (n, n))
        if rank(a, field) == n:
            return Matrix(a, field)
