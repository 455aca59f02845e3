"""Multiquadratic polynomials, sum-of-squares certificates, and their PT-rank links.

Q_M is the polynomial sum_{(i),(j)} M_{(i),(j)} prod_k X^{(k)}_{i_k} X^{(k)}_{j_k}.
Its monomials are keyed by one unordered pair {i_k, j_k} per block.  A list of
d-multilinear forms g_1..g_s (stored as coefficient tensors over [n]^d) is an SoS
certificate for M when Q_M = sum g_r^2, i.e. Q_M = Q_D with D = sum vec(g_r) vec(g_r)^T.

Outside characteristic 2, Q_X = 0 iff sum_{kappa in [d]} X^{T kappa} = 0, because
that sum at a canonical position equals 2^{#(i_k = j_k)} times the monomial
coefficient.  In characteristic 2 the coefficient map is compared directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from .fieldlinalg import Field, Matrix, gram_factor
from .ptcore import (
    PTCertificate, _pt_array, is_fully_symmetric, kappa_subsets, make_certificate,
    partial_transpose, refine_certificate, regroup, verify_pt_certificate,
)
from .tensorspace import HyperMatrix

__all__ = [
    "SoSCertificate", "InvalidSoS", "qm_coeffs", "verify_sos", "pt_to_sos", "sos_to_pt",
    "base_identity", "compose_sos", "pairing_upper_bound", "cayley_dickson_table",
]


class InvalidSoS(ValueError):
    """An SoS certificate does not represent the target polynomial."""


@dataclass
class SoSCertificate:
    """Terms g_r : [n]^d -> F with the claim Q_M = sum_r g_r^2."""

    n: int
    d: int
    field: Field
    terms: list = dc_field(default_factory=list)
    metadata: dict = dc_field(default_factory=dict)

    def gram(self) -> np.ndarray:
        size = self.n**self.d
        D = self.field.zeros((size, size))
        for g in self.terms:
            v = np.asarray(g).reshape(size)
            D = self.field.reduce(D + np.multiply.outer(v, v))
        return D


def qm_coeffs(M: HyperMatrix) -> dict:
    """Coefficients of Q_M keyed by tuples of per-block pairs (a_k, b_k) with a_k <= b_k.

    Each coefficient is the sum of the entries of M over all ordered
    representatives of the monomial.  Zero coefficients are omitted.
    """
    n, d = M.n, M.d
    field = M.field
    blocks = M.blocks()
    out: dict = {}
    for pos in itertools.product(range(n), repeat=2 * d):
        i, j = pos[:d], pos[d:]
        val = blocks[pos]
        if not field.nonzero_mask(np.asarray([val]))[0]:
            continue
        key = tuple((min(a, b), max(a, b)) for a, b in zip(i, j))
        out[key] = out.get(key, 0) + val
    return {k: field.reduce(np.asarray([v]))[0] for k, v in out.items()
            if field.nonzero_mask(field.reduce(np.asarray([v])))[0]}


def _symmetrized(X: np.ndarray, n: int, d: int, field: Field) -> np.ndarray:
    total = field.zeros(X.shape)
    for kappa in kappa_subsets(d, full=True):
        total = field.reduce(total + _pt_array(X, n, d, kappa))
    return total


def _check_shape(M: HyperMatrix, cert: SoSCertificate):
    if cert.n != M.n or cert.d != M.d:
        raise ValueError("certificate shape does not match the target")
    if cert.field != M.field:
        raise ValueError("certificate field does not match the target")
    for g in cert.terms:
        if np.asarray(g).size != M.size:
            raise ValueError("term has the wrong number of coefficients")


def verify_sos(M: HyperMatrix, cert: SoSCertificate, path: str = "auto") -> bool:
    """True iff Q_M = sum_r g_r^2 exactly.

    Args:
        path: ``"gram"`` (symmetrized Gram identity, characteristic != 2),
            ``"coeff"`` (monomial coefficient comparison) or ``"auto"``.
    """
    _check_shape(M, cert)
    field = M.field
    if path == "auto":
        path = "coeff" if field.characteristic == 2 else "gram"
    D = cert.gram()
    if path == "gram":
        if field.characteristic == 2:
            raise ValueError("the Gram path needs characteristic != 2")
        diff = field.reduce(D - M.data)
        return field.is_zero(_symmetrized(diff, M.n, M.d, field))
    if path == "coeff":
        diff = M.with_body(field.reduce(D - M.data))
        return not qm_coeffs(diff)
    raise ValueError(f"unknown path {path!r}")


def pt_to_sos(cert: PTCertificate) -> SoSCertificate:
    """SoS certificate from a PT certificate (characteristic != 2).

    D = sum_kappa N_kappa^{T kappa} has Q_D = Q_M since Q is invariant under
    partial transposes.  D is symmetrized to (D + D^T)/2, whose rank is at most
    2 * value, and Gram factored; each row of the factor is one term.
    """
    M = cert.target
    field = M.field
    if field.characteristic == 2:
        raise ValueError("SoS conversion needs characteristic != 2")
    D = field.zeros((M.size, M.size))
    for kappa, N in cert.parts.items():
        D = field.reduce(D + partial_transpose(N, kappa).data)
    half = field.inv(2)
    Ds = field.reduce((D + D.T) * half)
    L, info = gram_factor(Matrix(Ds, field))
    terms = [np.array(row).reshape((M.n,) * M.d) for row in L.data]
    meta = {"source_value": cert.value, "gram_rank": info["rank"], "rows": info["rows"],
            "split_pivots": info["split_pivots"], "bound": 4 * cert.value}
    out = SoSCertificate(M.n, M.d, field, terms, meta)
    if not verify_sos(M, out):
        raise AssertionError("pt_to_sos produced an invalid certificate")
    return out


def sos_to_pt(M: HyperMatrix, cert: SoSCertificate) -> PTCertificate:
    """PT certificate N_kappa = 2^{-(d-1)} (L^T L)^{T kappa}, kappa in [d-1], for fully symmetric M."""
    field = M.field
    if field.characteristic == 2:
        raise ValueError("conversion needs characteristic != 2")
    if not is_fully_symmetric(M):
        raise ValueError("target is not fully symmetric")
    if not verify_sos(M, cert):
        raise InvalidSoS("SoS certificate does not verify against the target")
    S = cert.gram()
    scale = field.inv(2 ** (M.d - 1)) if M.d > 1 else 1
    parts = {}
    for kappa in kappa_subsets(M.d):
        parts[kappa] = M.with_body(field.reduce(_pt_array(S, M.n, M.d, kappa) * scale))
    out = make_certificate(M, parts, {"terms": len(cert.terms),
                                      "bound": 2 ** (M.d - 1) * len(cert.terms)})
    verify_pt_certificate(out)
    return out


# --------------------------------------------------------------------------
# Composition identities


def _cd_mult(x, y):
    """Cayley-Dickson product of integer coefficient vectors of length 2^k."""
    m = len(x)
    if m == 1:
        return [x[0] * y[0]]
    h = m // 2
    a, b, c, d = x[:h], x[h:], y[:h], y[h:]

    def conj(z):
        return [z[0]] + [-t for t in z[1:]]

    ac = _cd_mult(a, c)
    db = _cd_mult(conj(d), b)
    da = _cd_mult(d, a)
    bc = _cd_mult(b, conj(c))
    return [s - t for s, t in zip(ac, db)] + [s + t for s, t in zip(da, bc)]


def cayley_dickson_table(n: int) -> np.ndarray:
    """Integer table c[k, i, j]: the k-th coordinate of e_i * e_j."""
    if n not in (1, 2, 4, 8):
        raise ValueError("composition identities exist only for n in {1, 2, 4, 8}")
    table = np.zeros((n, n, n), dtype=np.int64)
    eye = np.eye(n, dtype=np.int64).tolist()
    for i in range(n):
        for j in range(n):
            table[:, i, j] = _cd_mult(eye[i], eye[j])
    return table


def base_identity(n: int, field: Field, table: np.ndarray | None = None) -> SoSCertificate:
    """(sum x_i^2)(sum y_j^2) = sum_k (sum_{ij} c_kij x_i y_j)^2 for n in {1, 2, 4, 8}.

    The table is re-verified in ``field`` before use.
    """
    if field.characteristic == 2:
        raise ValueError("base identities need characteristic != 2")
    table = cayley_dickson_table(n) if table is None else np.asarray(table)
    terms = [field.elements(table[k]) for k in range(n)]
    cert = SoSCertificate(n, 2, field, terms, {"family": "cayley-dickson", "n": n})
    if not verify_sos(HyperMatrix.identity(n, 2, field), cert):
        raise InvalidSoS(f"embedded base identity for n={n} fails in {field}")
    return cert


def compose_sos(n: int, d: int, field: Field, table: np.ndarray | None = None) -> SoSCertificate:
    """n-term SoS certificate for prod_{k<=d} (sum_i (X^{(k)}_i)^2), d a power of two.

    Adjacent blocks are paired with the base identity; the resulting n forms are
    treated as new variables and paired again.
    """
    if n not in (2, 4, 8):
        raise ValueError("compose_sos supports n in {2, 4, 8}")
    if d < 1 or d & (d - 1):
        raise ValueError("d must be a power of two")
    base = base_identity(n, field, table)
    c = np.stack([np.asarray(t) for t in base.terms])          # (k, i, j)
    # level 0: the forms of each block are its variables
    forms = [field.eye(n) for _ in range(d)]
    while len(forms) > 1:
        nxt = []
        for left, right in zip(forms[::2], forms[1::2]):
            # new form k = sum_ij c_kij left_i (x) right_j
            lf = left.reshape(n, -1)
            rf = right.reshape(n, -1)
            tmp = field.reduce(np.tensordot(c, lf, axes=([1], [0])))      # (k, j, L)
            out = field.reduce(np.tensordot(tmp, rf, axes=([1], [0])))    # (k, L, R)
            nxt.append(out.reshape((n,) + left.shape[1:] + right.shape[1:]))
        forms = nxt
    top = forms[0]
    terms = [field.reduce(top[k]) for k in range(n)]
    cert = SoSCertificate(n, d, field, terms, {"family": "composed", "levels": int(np.log2(d))})
    if not verify_sos(HyperMatrix.identity(n, d, field), cert):
        raise InvalidSoS("composed identity failed to verify")
    return cert


def _builtin_provider(N: int, field: Field) -> PTCertificate:
    """Verified certificate for I_{N^2} over [N]^2 from the composition identity."""
    I = HyperMatrix.identity(N, 2, field)
    return sos_to_pt(I, base_identity(N, field))


def pairing_upper_bound(n: int, d: int, field: Field, provider=None) -> PTCertificate:
    """Certificate for I_{n^d} (d even) that uses only the transposes at the coarse grouping [n^{d/2}]^2."""
    if d % 2:
        raise ValueError("d must be even")
    N = n ** (d // 2)
    if provider is None:
        if N not in (1, 2, 4, 8):
            raise ValueError(f"no built-in provider for coarse size {N}")
        coarse = _builtin_provider(N, field) if N > 1 else make_certificate(
            HyperMatrix.identity(1, 2, field), {(): HyperMatrix.identity(1, 2, field)})
    else:
        coarse = provider(N, field)
    I = HyperMatrix.identity(n, d, field)
    if coarse.target != regroup(I, d // 2, 2):
        raise ValueError("provider certificate has the wrong target")
    fine = refine_certificate(coarse, n, d // 2)
    fine.metadata.update({"coarse_value": coarse.value, "coarse_size": N})
    verify_pt_certificate(fine)
    return fine
