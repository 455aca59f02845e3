"""Tensors over labelled index sets, flattenings, and the shifted/padded encodings.

Index convention: inside every multi-index the first label is the most
significant digit, so a tensor's entries are its numpy array in C order.
Indices are 0-based internally; the 1-based pairing ``<i, j> = (i-1)n + j``
becomes ``i*n + j`` here.
"""

from __future__ import annotations

import math
from typing import Hashable, Sequence

import numpy as np

from .fieldlinalg import Field, FieldMismatch, Matrix

__all__ = [
    "Tensor", "HyperMatrix", "pair_index", "unpair", "flatten_mat",
    "tensor_product", "flat", "unflat", "path_labels", "shifted_tensor",
    "padded_tensor", "imm_tensor", "shifted_to_matrix", "MAX_INDEX_BITS",
]

MAX_INDEX_BITS = 30


def pair_index(i: int, j: int, n: int) -> int:
    """1-based pairing <i, j> = (i-1)n + j."""
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"indices ({i}, {j}) out of range for n={n}")
    return (i - 1) * n + j


def unpair(k: int, n: int) -> tuple[int, int]:
    if not 1 <= k <= n * n:
        raise ValueError(f"index {k} out of range for n={n}")
    i, j = divmod(k - 1, n)
    return i + 1, j + 1


def _check_size(n: int, order: int):
    if n > 1 and order * math.log2(n) > MAX_INDEX_BITS:
        raise ValueError(f"tensor [{n}]^{order} exceeds the {MAX_INDEX_BITS}-bit size guard")


class Tensor:
    """A map [n]^D -> F with a fixed label order.

    Args:
        n: alphabet size of every coordinate.
        labels: ordered label sequence (hashable, distinct).
        data: array of shape (n,)*len(labels); coordinates follow ``labels``.
        field: field context.
    """

    __slots__ = ("n", "labels", "data", "field")

    def __init__(self, n: int, labels: Sequence[Hashable], data, field: Field):
        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate labels")
        _check_size(n, len(labels))
        arr = field.elements(data)
        if arr.shape != (n,) * len(labels):
            arr = arr.reshape((n,) * len(labels))
        arr.flags.writeable = False
        self.n = n
        self.labels = labels
        self.data = arr
        self.field = field

    @classmethod
    def zeros(cls, n, labels, field):
        return cls(n, labels, field.zeros((n,) * len(tuple(labels))), field)

    @property
    def order(self) -> int:
        return len(self.labels)

    def axis(self, label) -> int:
        return self.labels.index(label)

    def reorder(self, labels: Sequence[Hashable]) -> "Tensor":
        """Same tensor with coordinates permuted into ``labels`` order."""
        labels = tuple(labels)
        if set(labels) != set(self.labels) or len(labels) != len(self.labels):
            raise ValueError("reorder needs a permutation of the labels")
        perm = [self.axis(lab) for lab in labels]
        return Tensor(self.n, labels, self.data.transpose(perm), self.field)

    def _check(self, other: "Tensor"):
        if other.field != self.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")
        if other.n != self.n or set(other.labels) != set(self.labels):
            raise ValueError("tensors live on different index sets")

    def __add__(self, other):
        self._check(other)
        other = other.reorder(self.labels)
        return Tensor(self.n, self.labels, self.field.reduce(self.data + other.data), self.field)

    def __sub__(self, other):
        self._check(other)
        other = other.reorder(self.labels)
        return Tensor(self.n, self.labels, self.field.reduce(self.data - other.data), self.field)

    def __neg__(self):
        return Tensor(self.n, self.labels, self.field.reduce(-self.data), self.field)

    def scale(self, c) -> "Tensor":
        return Tensor(self.n, self.labels, self.field.reduce(self.data * c), self.field)

    def is_zero(self) -> bool:
        return self.field.is_zero(self.data)

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        if other.field != self.field or other.n != self.n or other.labels != self.labels:
            return False
        return self.field.equal(self.data, other.data)

    __hash__ = None

    def __repr__(self):
        return f"Tensor(n={self.n}, labels={self.labels}, over {self.field})"


class HyperMatrix:
    """An n^d x n^d matrix with rows and columns indexed by [n]^d (first index most significant)."""

    __slots__ = ("n", "d", "body")

    def __init__(self, n: int, d: int, body):
        if not isinstance(body, Matrix):
            raise TypeError("body must be a Matrix")
        if body.shape != (n**d, n**d):
            raise ValueError(f"body has shape {body.shape}, expected {(n**d, n**d)}")
        self.n, self.d, self.body = n, d, body

    @classmethod
    def from_array(cls, n: int, d: int, data, field: Field) -> "HyperMatrix":
        return cls(n, d, Matrix(np.asarray(data).reshape(n**d, n**d), field))

    @classmethod
    def identity(cls, n: int, d: int, field: Field) -> "HyperMatrix":
        return cls(n, d, Matrix(field.eye(n**d), field))

    @classmethod
    def zeros(cls, n: int, d: int, field: Field) -> "HyperMatrix":
        return cls(n, d, Matrix(field.zeros((n**d, n**d)), field))

    @property
    def field(self) -> Field:
        return self.body.field

    @property
    def data(self) -> np.ndarray:
        return self.body.data

    @property
    def size(self) -> int:
        return self.n**self.d

    def blocks(self) -> np.ndarray:
        """View as an array of shape (n,)*2d ordered (i_1..i_d, j_1..j_d)."""
        return self.data.reshape((self.n,) * (2 * self.d))

    def with_body(self, data) -> "HyperMatrix":
        return HyperMatrix(self.n, self.d, Matrix(np.asarray(data).reshape(self.size, self.size), self.field))

    def same_shape(self, other: "HyperMatrix") -> bool:
        return self.n == other.n and self.d == other.d and self.field == other.field

    def __add__(self, other):
        return HyperMatrix(self.n, self.d, self.body + other.body)

    def __sub__(self, other):
        return HyperMatrix(self.n, self.d, self.body - other.body)

    def __eq__(self, other):
        if not isinstance(other, HyperMatrix):
            return NotImplemented
        return self.n == other.n and self.d == other.d and self.body == other.body

    __hash__ = None

    def __repr__(self):
        return f"HyperMatrix(n={self.n}, d={self.d}, over {self.field})"


def flatten_mat(A: Tensor, I: Sequence[Hashable], J: Sequence[Hashable]) -> Matrix:
    """Mat_{I,J}(A).  Rows and columns are ordered lexicographically in A's label order."""
    I, J = set(I), set(J)
    if I & J or (I | J) != set(A.labels):
        raise ValueError("flattening spec is not a partition of the labels")
    rows = [k for k, lab in enumerate(A.labels) if lab in I]
    cols = [k for k, lab in enumerate(A.labels) if lab in J]
    arr = A.data.transpose(rows + cols).reshape(A.n ** len(rows), A.n ** len(cols))
    return Matrix(arr, A.field)


def tensor_product(A: Tensor, B: Tensor) -> Tensor:
    """A (x) B with labels A's then B's."""
    if A.field != B.field:
        raise FieldMismatch(f"{A.field} vs {B.field}")
    if A.n != B.n:
        raise ValueError("alphabet sizes differ")
    if set(A.labels) & set(B.labels):
        raise ValueError("label collision in tensor product")
    data = A.field.reduce(np.multiply.outer(A.data, B.data))
    return Tensor(A.n, A.labels + B.labels, data, A.field)


# --------------------------------------------------------------------------
# Path-graph labels and the flattening A -> A^flat


def path_labels(edges: Sequence[int]) -> tuple:
    """Directed-edge labels of the path subgraph with the given edges.

    Edge ``i`` is {v_{i-1}, v_i}; it contributes the labels (i-1, i) and
    (i, i-1) in that order.  Edges are taken in increasing order.
    """
    out = []
    for i in sorted(set(edges)):
        out.append((i - 1, i))
        out.append((i, i - 1))
    return tuple(out)


def _edges_of(labels) -> list[int]:
    edges = set()
    for lab in labels:
        if not (isinstance(lab, tuple) and len(lab) == 2 and abs(lab[0] - lab[1]) == 1):
            raise ValueError(f"label {lab!r} is not a directed path edge")
        edges.add(max(lab))
    if set(labels) != set(path_labels(edges)):
        raise ValueError("labels are not the full directed-edge set of a path subgraph")
    return sorted(edges)


def flat(A: Tensor) -> Tensor:
    """A^flat over [n^2]^{E(G)}: coordinate of edge i is <x_{v_{i-1} v_i}, x_{v_i v_{i-1}}>."""
    edges = _edges_of(A.labels)
    canon = A.reorder(path_labels(edges))
    data = canon.data.reshape((A.n * A.n,) * len(edges))
    return Tensor(A.n * A.n, tuple(edges), data, A.field)


def unflat(F: Tensor) -> Tensor:
    """Inverse of :func:`flat`; F must be labelled by edge integers."""
    n = math.isqrt(F.n)
    if n * n != F.n:
        raise ValueError("alphabet size is not a perfect square")
    edges = sorted(F.labels)
    F = F.reorder(edges)
    data = F.data.reshape((n,) * (2 * len(edges)))
    return Tensor(n, path_labels(edges), data, F.field)


# --------------------------------------------------------------------------
# Shifted / padded tensors and IMM


def padded_tensor(M: HyperMatrix) -> Tensor:
    """Order 2d+2 tensor (p, i_1, j_1, ..., i_d, j_d, q) -> 1{p=q=first} M_{(i),(j)}.

    Labels are the directed edges of the path with edges 1..d+1, so that
    ``flat(padded_tensor(M)) == shifted_tensor(M)``.
    """
    n, d = M.n, M.d
    field = M.field
    blocks = M.blocks()
    # interleave (i_1..i_d, j_1..j_d) -> (i_1, j_1, ..., i_d, j_d)
    perm = [x for k in range(d) for x in (k, d + k)]
    inner = blocks.transpose(perm)
    out = field.zeros((n,) * (2 * d + 2))
    out[(0,) + (slice(None),) * (2 * d) + (0,)] = inner
    return Tensor(n, path_labels(range(1, d + 2)), out, field)


def shifted_tensor(M: HyperMatrix) -> Tensor:
    """Order d+1 tensor over [n^2]: (<p,i_1>, <j_1,i_2>, ..., <j_d,q>) -> 1{p=q=first} M."""
    return flat(padded_tensor(M))


def shifted_to_matrix(S: Tensor) -> tuple[HyperMatrix, bool]:
    """Recover M from a tensor over [n^2]^{d+1} on edges 1..d+1.

    Returns ``(M, exact)`` where ``exact`` says whether S is supported on the
    p=q=first slice, i.e. whether S really is a shifted tensor.
    """
    A = unflat(S)
    n = A.n
    k = A.order
    d = k // 2 - 1
    data = A.reorder(path_labels(range(1, d + 2))).data
    inner = data[(0,) + (slice(None),) * (2 * d) + (0,)]
    perm = [2 * k_ for k_ in range(d)] + [2 * k_ + 1 for k_ in range(d)]
    M = HyperMatrix.from_array(n, d, inner.transpose(perm), S.field)
    exact = A.field.equal(data, padded_tensor(M).data)
    return M, exact


def imm_tensor(n: int, d: int, field: Field, corner: bool = False) -> Tensor:
    """IMM_{n,d} over [n^2]^d: entry at (<a_1,b_1>, ..., <a_d,b_d>) is 1[b_k = a_{k+1} for all k].

    This is the coefficient tensor of the sum of all entries of a product of d
    symbolic n x n matrices.  With ``corner=True`` the outer indices are pinned
    as well (a_1 = b_d = first), giving the (1,1) entry of the product; that
    variant is the shifted tensor of the n^{d-1} x n^{d-1} identity.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    arr = np.ones((n,) * (2 * d), dtype=np.int64)
    idx = np.indices((n,) * (2 * d))
    for k in range(d - 1):
        arr = arr * (idx[2 * k + 1] == idx[2 * k + 2])
    if corner:
        arr = arr * (idx[0] == 0) * (idx[2 * d - 1] == 0)
    return Tensor(n * n, tuple(range(1, d + 1)), arr.reshape((n * n,) * d), field)
