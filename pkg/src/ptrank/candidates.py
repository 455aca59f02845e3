"""The W_T candidate family and checks of its rank properties.

(W_T)_{(i),(j)} = omega^{(i) T (j)^T} with i_k, j_k in {0, ..., n-1} and the
exponent reduced mod n.  A context is either ComplexField (omega = e^{2 pi i/n})
or a CyclotomicField (GF(q) with q = 1 mod n and an element of order n).
"""

from __future__ import annotations

import itertools

import numpy as np
from sympy import isprime

from .fieldlinalg import ComplexField, CyclotomicField, Field, Matrix, rank
from .ptcore import kappa_subsets, partial_transpose
from .tensorspace import HyperMatrix, flatten_mat, path_labels, shifted_tensor, unflat

__all__ = [
    "check_parameters", "contexts", "build_wt", "cauchy_T", "cyclic_T", "triangular_T",
    "cyclic_rank1_cert", "wt_kappa_rank_scan", "wt_lambda_flatten_rank", "triangular_abp",
    "triangular_flattening_check", "unit_rescale", "dual_context_report",
]


def check_parameters(n: int, d: int, relax: bool = False):
    """Default policy: d even, n prime, n > 2d.  ``relax`` skips the checks."""
    if relax:
        return
    if d % 2:
        raise ValueError(f"d = {d} must be even (pass relax to override)")
    if not isprime(n):
        raise ValueError(f"n = {n} must be prime (pass relax to override)")
    if n <= 2 * d:
        raise ValueError(f"n = {n} must exceed 2d = {2 * d} (pass relax to override)")


def contexts(n: int, eps: float = 1e-9) -> list[Field]:
    """One complex context and the two default cyclotomic-modular contexts."""
    return [ComplexField(eps)] + CyclotomicField.for_order(n)


def _powers(field: Field, n: int) -> np.ndarray:
    w = field.root_of_unity(n)
    if isinstance(field, ComplexField):
        return np.exp(2j * np.pi * np.arange(n) / n)
    return np.array([pow(int(w), k, field.p) for k in range(n)], dtype=np.int64)


def _exponents(T: np.ndarray, n: int) -> np.ndarray:
    d = T.shape[0]
    idx = np.array(list(itertools.product(range(n), repeat=d)), dtype=np.int64)   # (n^d, d)
    return (idx @ (T % n) @ idx.T) % n


def build_wt(T, n: int, field: Field) -> HyperMatrix:
    """W_T over ``field``; T is a d x d integer matrix read mod n."""
    T = np.asarray(T, dtype=np.int64)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError("T must be square")
    d = T.shape[0]
    table = _powers(field, n)
    return HyperMatrix.from_array(n, d, table[_exponents(T, n)], field)


def cauchy_T(d: int, n: int) -> np.ndarray:
    """T_{a,b} = (x_a - y_b)^{-1} mod n with x_a = a, y_b = d + b (a, b = 1..d).

    Every square submatrix is nonsingular; minors up to 3 x 3 are checked.
    """
    if not isprime(n):
        raise ValueError(f"n = {n} must be prime")
    if n <= 2 * d:
        raise ValueError(f"n = {n} must exceed 2d = {2 * d}")
    T = np.array([[pow((a - (d + b)) % n, -1, n) for b in range(1, d + 1)]
                  for a in range(1, d + 1)], dtype=np.int64)
    from sympy import Matrix as SMatrix
    for k in range(1, min(d, 3) + 1):
        for rows in itertools.combinations(range(d), k):
            for cols in itertools.combinations(range(d), k):
                if SMatrix(T[np.ix_(rows, cols)].tolist()).det() % n == 0:
                    raise AssertionError(f"singular {k}x{k} minor in the Cauchy matrix")
    return T


def cyclic_T(d: int) -> np.ndarray:
    """T_{a,b} = 1[a + 1 = b mod d]."""
    T = np.zeros((d, d), dtype=np.int64)
    for a in range(d):
        T[a, (a + 1) % d] = 1
    return T


def triangular_T(d: int) -> np.ndarray:
    """T_{a,b} = 1[a <= b]."""
    return np.triu(np.ones((d, d), dtype=np.int64))


def cyclic_rank1_cert(n: int, d: int, field: Field):
    """(kappa, u, v) with W_{T_2}^{T kappa} = u v^T, kappa = {1, 3, ..., d-1}.

    Rows of the transposed matrix are (j_1, i_2, j_3, ..., i_d) and columns
    (i_1, j_2, ..., j_d); u collects the exponent terms i_a j_{a+1} with a even
    (indices mod d) and v those with a odd.
    """
    if d % 2:
        raise ValueError("d must be even")
    kappa = tuple(range(1, d, 2))
    table = _powers(field, n)
    idx = np.array(list(itertools.product(range(n), repeat=d)), dtype=np.int64)
    # r = (j_1, i_2, j_3, ..., i_d): a even (1-based) -> i_a = r[a-1], j_{a+1} = r[a mod d]
    eu = sum(idx[:, a - 1] * idx[:, a % d] for a in range(2, d + 1, 2)) % n
    # c = (i_1, j_2, ..., j_d): a odd -> i_a = c[a-1], j_{a+1} = c[a]
    ev = sum(idx[:, a - 1] * idx[:, a] for a in range(1, d, 2)) % n
    u, v = table[eu], table[ev]
    W = build_wt(cyclic_T(d), n, field)
    P = partial_transpose(W, kappa)
    if not field.equal(P.data, field.reduce(np.multiply.outer(u, v))):
        raise AssertionError("outer product does not reproduce the partial transpose")
    return kappa, u, v


def wt_kappa_rank_scan(W: HyperMatrix) -> dict:
    """Rank of W^{T kappa} for every kappa in [d]."""
    return {k: rank(partial_transpose(W, k).body) for k in kappa_subsets(W.d, full=True)}


def wt_lambda_flatten_rank(W: HyperMatrix, lam) -> int:
    """Rank of W^{[lambda]}: rows (i_lambda, j_lambda), columns (i_rest, j_rest)."""
    n, d = W.n, W.d
    lam = sorted(set(lam))
    rest = [k for k in range(1, d + 1) if k not in lam]
    rows = [k - 1 for k in lam] + [d + k - 1 for k in lam]
    cols = [k - 1 for k in rest] + [d + k - 1 for k in rest]
    data = W.blocks().transpose(rows + cols).reshape(n ** (2 * len(lam)), n ** (2 * len(rest)))
    return rank(Matrix(data, W.field))


def unit_rescale(W: HyperMatrix, rng: np.random.Generator) -> HyperMatrix:
    """Scale rows and columns by random powers of omega in per-block product form.

    The row scale is r_1(i_1) ... r_d(i_d) and likewise for columns; a partial
    transpose only moves factors between the two sides, so every scan rank is kept.
    """
    n, d = W.n, W.d
    table = _powers(W.field, n)

    def scale():
        s = table[rng.integers(0, n, size=n)]
        for _ in range(d - 1):
            s = W.field.reduce(np.multiply.outer(s, table[rng.integers(0, n, size=n)]).reshape(-1))
        return s

    r, c = scale(), scale()
    return W.with_body(W.field.reduce(W.field.reduce(r[:, None] * W.data) * c[None, :]))


def triangular_abp(n: int, d: int, field: Field):
    """Width-n ordered program for the shifted tensor of W_{T_3}.

    The state is the running sum s = i_1 + ... + i_k mod n; reading
    <j_k, i_{k+1}> multiplies by omega^{j_k s}.
    """
    from .abpformula import OrderedABP

    table = _powers(field, n)
    m = n * n
    first = field.zeros((1, n, m))
    for s in range(n):
        first[0, s, 0 * n + s] = 1
    layers = [first]
    for _ in range(d - 1):
        L = field.zeros((n, n, m))
        for s in range(n):
            for j in range(n):
                for i in range(n):
                    L[s, (s + i) % n, j * n + i] = table[(j * s) % n]
        layers.append(L)
    last = field.zeros((n, 1, m))
    for s in range(n):
        for j in range(n):
            last[s, 0, j * n + 0] = table[(j * s) % n]
    layers.append(last)
    return OrderedABP(m, layers, field.ones(1), field.ones(1), field)


def triangular_flattening_check(n: int, d: int, field: Field, provider="builtin") -> dict:
    """Balanced flattening rank of the unflattened shifted W_{T_3}, plus the ABP route."""
    from .abpformula import abp_eval, abp_to_pt_cert

    W = build_wt(triangular_T(d), n, field)
    S = shifted_tensor(W)
    A = unflat(S)
    labels = path_labels(range(1, d + 2))
    mat_rank = rank(flatten_mat(A, labels[:d + 1], labels[d + 1:]))
    abp = triangular_abp(n, d, field)
    report = {"n": n, "d": d, "field": str(field), "rank": mat_rank, "bound": n * n,
              "ok": mat_rank <= n * n, "abp_matches": abp_eval(abp) == S,
              "abp_width": max(abp.widths)}
    if d % 2 == 0 and not isinstance(field, ComplexField):
        try:
            cert = abp_to_pt_cert(abp, W, provider=provider)
            report["pt_certificate_value"] = cert.value
        except ValueError as exc:
            report["pt_certificate_value"] = None
            report["provider_note"] = str(exc)
    return report


def dual_context_report(T, n: int, lams=None) -> dict:
    """Per-context kappa scans and lambda ranks plus an agreement flag."""
    T = np.asarray(T)
    d = T.shape[0]
    lams = [tuple(l) for r in range(d + 1) for l in itertools.combinations(range(1, d + 1), r)] \
        if lams is None else lams
    out = {"n": n, "d": d, "T": T.tolist(), "contexts": []}
    for ctx in contexts(n):
        W = build_wt(T, n, ctx)
        scan = wt_kappa_rank_scan(W)
        lam = {l: wt_lambda_flatten_rank(W, l) for l in lams}
        out["contexts"].append({"field": str(ctx), "kappa_ranks": scan, "lambda_ranks": lam})
    first = out["contexts"][0]
    out["agree"] = all(c["kappa_ranks"] == first["kappa_ranks"] and c["lambda_ranks"] == first["lambda_ranks"]
                       for c in out["contexts"])
    return out
