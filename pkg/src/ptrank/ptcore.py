"""Partial transposes, PT-rank certificates, exact oracles and heuristics.

Partial transposes are indexed by 1-based block sets kappa.  Certificates are
keyed by kappa contained in [d-1]: a part keyed by a set containing d is moved to
the complementary key, since the full transpose of ``N^{T kappa}`` is
``N^{T complement}`` and rank is transpose invariant.

Two exact oracles are provided.

``exhaustive``
    Literal enumeration of every decomposition M = sum_kappa N_kappa with the
    last part determined by the others.  Enumeration runs over the free parts in
    kappa-lexicographic order, entries little endian in base p; the first
    minimum wins.

``table``
    PT-rank(M) <= k iff M is a sum of k PT-basic matrices.  All PT-basic
    matrices are listed, and membership of M - b in the 1- and 2-fold sumsets
    is looked up in boolean tables over the whole matrix space.  Only for
    p^(n^{2d}) <= 2^27.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .fieldlinalg import (
    ComplexField, Field, Matrix, PrimeField, batch_rank, kron, rank, rank_factorization,
)
from .tensorspace import HyperMatrix

__all__ = [
    "InvalidCertificate", "BudgetExceeded", "PTCertificate", "DEFAULT_BUDGET",
    "kappa_subsets", "canonical_kappa", "partial_transpose", "is_fully_symmetric",
    "is_pt_basic", "verify_pt_certificate", "normalize_parts", "pt_rank_exact",
    "pt_rank_table", "pt_rank_search", "kron_act", "regroup", "refine_certificate",
    "transpose_rank_growth", "ptrank_census", "fully_symmetric_orbits",
    "example_3_squared", "example_identity_certificate", "sum_certificates",
]

DEFAULT_BUDGET = 2**28
TABLE_LIMIT = 2**27


class InvalidCertificate(ValueError):
    """A certificate failed verification."""


class BudgetExceeded(RuntimeError):
    """An exhaustive search would exceed its enumeration budget."""


# --------------------------------------------------------------------------
# kappa sets and partial transposes


def kappa_subsets(d: int, full: bool = False) -> list[tuple[int, ...]]:
    """Subsets of [d-1] (or of [d] with ``full``) in lexicographic order of sorted tuples."""
    top = d if full else d - 1
    subs = [c for r in range(top + 1) for c in itertools.combinations(range(1, top + 1), r)]
    return sorted(subs)


def canonical_kappa(kappa, d: int) -> tuple[int, ...]:
    """Map kappa in [d] to its key in [d-1] (complement when d is a member)."""
    kappa = tuple(sorted(set(kappa)))
    if any(k < 1 or k > d for k in kappa):
        raise ValueError(f"kappa {kappa} not contained in [1..{d}]")
    if d in kappa:
        kappa = tuple(k for k in range(1, d + 1) if k not in kappa)
    return kappa


def _pt_axes(d: int, kappa) -> list[int]:
    axes = list(range(2 * d))
    for k in kappa:
        if not 1 <= k <= d:
            raise ValueError(f"kappa member {k} out of range 1..{d}")
        axes[k - 1], axes[d + k - 1] = axes[d + k - 1], axes[k - 1]
    return axes


def _pt_array(data: np.ndarray, n: int, d: int, kappa) -> np.ndarray:
    """Partial transpose of an array of shape (..., n^d, n^d)."""
    lead = data.shape[:-2]
    view = data.reshape(lead + (n,) * (2 * d))
    axes = list(range(len(lead))) + [len(lead) + a for a in _pt_axes(d, kappa)]
    return view.transpose(axes).reshape(lead + (n**d, n**d))


def partial_transpose(M: HyperMatrix, kappa) -> HyperMatrix:
    """M^{T kappa}: swap i_k and j_k for every k in kappa."""
    return M.with_body(_pt_array(M.data, M.n, M.d, kappa))


def is_fully_symmetric(M: HyperMatrix) -> bool:
    return all(partial_transpose(M, (k,)) == M for k in range(1, M.d + 1))


def is_pt_basic(M: HyperMatrix) -> tuple[bool, tuple[int, ...] | None]:
    """First kappa in [d-1] (lexicographic) with rank(M^{T kappa}) = 1, if any."""
    for kappa in kappa_subsets(M.d):
        if rank(partial_transpose(M, kappa).body) == 1:
            return True, kappa
    return False, None


# --------------------------------------------------------------------------
# Certificates


@dataclass
class PTCertificate:
    """Decomposition M = sum_kappa N_kappa with value sum_kappa rank(N_kappa^{T kappa})."""

    target: HyperMatrix
    parts: dict
    value: int
    metadata: dict = dc_field(default_factory=dict)

    @property
    def n(self):
        return self.target.n

    @property
    def d(self):
        return self.target.d

    def part_ranks(self) -> dict:
        return {k: rank(partial_transpose(N, k).body) for k, N in self.parts.items()}


def normalize_parts(parts: dict, n: int, d: int, field: Field) -> dict:
    """Re-key parts by kappa in [d-1], merging collisions; zero parts are dropped."""
    out: dict = {}
    for kappa, N in parts.items():
        key = canonical_kappa(kappa, d)
        out[key] = out[key] + N if key in out else N
    ordered = {}
    for key in kappa_subsets(d):
        if key in out and not out[key].body.is_zero():
            ordered[key] = out[key]
    return ordered


def make_certificate(target: HyperMatrix, parts: dict, metadata=None) -> PTCertificate:
    parts = normalize_parts(parts, target.n, target.d, target.field)
    value = sum(rank(partial_transpose(N, k).body) for k, N in parts.items())
    return PTCertificate(target, parts, value, dict(metadata or {}))


def verify_pt_certificate(cert: PTCertificate) -> int:
    """Check sum of parts equals the target and recompute the value.

    Raises:
        InvalidCertificate: wrong shape, wrong field, or the parts do not sum to the target.
    """
    M = cert.target
    total = M.field.zeros((M.size, M.size))
    for kappa, N in cert.parts.items():
        if not isinstance(N, HyperMatrix) or not N.same_shape(M):
            raise InvalidCertificate(f"part {kappa} has the wrong shape or field")
        if any(not 1 <= k <= M.d for k in kappa):
            raise InvalidCertificate(f"part key {kappa} not contained in [d]")
        total = M.field.reduce(total + N.data)
    if not M.field.equal(total, M.data):
        raise InvalidCertificate("parts do not sum to the target")
    return sum(rank(partial_transpose(N, k).body) for k, N in cert.parts.items())


def sum_certificates(certs: list[PTCertificate], target: HyperMatrix, metadata=None) -> PTCertificate:
    """Part-wise sum of certificates; the target must equal the sum of their targets."""
    parts: dict = {}
    for c in certs:
        for k, N in c.parts.items():
            parts[k] = parts[k] + N if k in parts else N
    return make_certificate(target, parts, metadata)


# --------------------------------------------------------------------------
# Exhaustive oracle


def _digits(codes: np.ndarray, p: int, width: int) -> np.ndarray:
    """Little-endian base-p digits of each code, shape (len(codes), width)."""
    powers = p ** np.arange(width, dtype=np.int64)
    return (codes[:, None] // powers[None, :]) % p


def _encode(digits: np.ndarray, p: int) -> np.ndarray:
    powers = p ** np.arange(digits.shape[-1], dtype=np.int64)
    return digits.astype(np.int64) @ powers


def _require_finite(field: Field):
    if not isinstance(field, PrimeField):
        raise ValueError(f"exact PT-rank needs a finite prime field, got {field}")


def pt_rank_exact(M: HyperMatrix, budget: int = DEFAULT_BUDGET, threads: int = 1,
                  chunk: int = 1 << 18, method: str = "exhaustive") -> tuple[int, PTCertificate]:
    """Exact PT-rank over a finite field.

    Args:
        M: target matrix.
        budget: maximal number of enumerated decompositions (exhaustive method).
        threads: worker threads for the chunked enumeration; the reduction is
            deterministic (lowest value, then lowest enumeration index).
        chunk: enumeration chunk size.
        method: ``"exhaustive"`` or ``"table"`` (see module docs).

    Returns:
        (value, witness certificate).
    """
    if method == "table":
        return pt_rank_table(M)
    if method != "exhaustive":
        raise ValueError(f"unknown method {method!r}")
    field = M.field
    _require_finite(field)
    p, n, d = field.p, M.n, M.d
    keys = kappa_subsets(d)
    free = keys[:-1]
    width = len(free) * n ** (2 * d)
    total = p**width
    if total > budget:
        raise BudgetExceeded(f"{total} decompositions exceed the budget {budget}")
    size = n**d
    target = M.data.astype(np.int64)
    last = keys[-1]

    def evaluate(start: int, stop: int):
        codes = np.arange(start, stop, dtype=np.int64)
        digs = _digits(codes, p, width) if width else np.zeros((len(codes), 0), dtype=np.int64)
        parts = digs.reshape(len(codes), len(free), size, size)
        rest = (target[None] - parts.sum(axis=1)) % p
        value = batch_rank(_pt_array(rest, n, d, last), field)
        for t, kappa in enumerate(free):
            value = value + batch_rank(_pt_array(parts[:, t], n, d, kappa), field)
        best = int(np.argmin(value))
        return int(value[best]), start + best

    bounds = [(s, min(s + chunk, total)) for s in range(0, total, chunk)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda b: evaluate(*b), bounds))
    else:
        results = [evaluate(*b) for b in bounds]
    best_value, best_code = min(results)

    digs = _digits(np.array([best_code], dtype=np.int64), p, width)[0] if width else np.zeros(0, dtype=np.int64)
    parts = {}
    acc = np.zeros((size, size), dtype=np.int64)
    for t, kappa in enumerate(free):
        block = digs[t * size * size:(t + 1) * size * size].reshape(size, size)
        parts[kappa] = M.with_body(block)
        acc = acc + block
    parts[last] = M.with_body((target - acc) % p)
    cert = make_certificate(M, parts, {"method": "exhaustive", "enumerated": total,
                                       "witness_index": best_code})
    if cert.value != best_value:
        raise AssertionError("witness value mismatch")
    return best_value, cert


# --------------------------------------------------------------------------
# Table oracle


@lru_cache(maxsize=4)
def _basic_table(p: int, n: int, d: int):
    """All PT-basic matrices (as codes and digit rows) plus 1- and 2-fold sumset tables."""
    field = PrimeField(p)
    N = n ** (2 * d)
    space = p**N
    if space > TABLE_LIMIT:
        raise BudgetExceeded(f"matrix space of size {space} exceeds the table limit")
    size = n**d
    vecs = _digits(np.arange(1, p**size, dtype=np.int64), p, size)
    lead = vecs[np.arange(len(vecs)), (vecs != 0).argmax(axis=1)]
    u = vecs[lead == 1]                                   # normalized left factors
    outer = (u[:, None, :, None] * vecs[None, :, None, :]) % p
    outer = outer.reshape(-1, size, size)
    digits = []
    kappas = []
    for kappa in kappa_subsets(d):
        img = _pt_array(outer, n, d, kappa).reshape(len(outer), N)
        digits.append(img)
        kappas.extend([kappa] * len(img))
    digits = np.concatenate(digits)
    codes = _encode(digits, p)
    codes, first = np.unique(codes, return_index=True)
    digits = digits[first]
    kappas = [kappas[i] for i in first]
    t1 = np.zeros(space, dtype=bool)
    t1[codes] = True
    t2 = np.zeros(space, dtype=bool)
    for row in digits:
        t2[_encode((digits + row) % p, p)] = True
    return field, digits, codes, kappas, t1, t2


def pt_rank_table(M: HyperMatrix) -> tuple[int, PTCertificate]:
    """Exact PT-rank via sumset membership tables (tiny sizes only)."""
    field = M.field
    _require_finite(field)
    p, n, d = field.p, M.n, M.d
    _, digits, codes, kappas, t1, t2 = _basic_table(p, n, d)
    m = M.data.reshape(-1).astype(np.int64)
    upper = min(rank(partial_transpose(M, k).body) for k in kappa_subsets(d))

    def chosen(*idx):
        return [(kappas[i], digits[i]) for i in idx]

    def complete_pair(rest):
        # rest is in the 2-fold sumset: find b1 + b2 = rest
        hits = np.flatnonzero(t1[_encode((rest[None] - digits) % p, p)])
        i = int(hits[0])
        j = int(np.flatnonzero(codes == _encode(((rest - digits[i]) % p)[None], p)[0])[0])
        return [i, j]

    def index_of(code):
        return int(np.flatnonzero(codes == code)[0])

    if not m.any():
        terms = []
    elif t1[_encode(m[None], p)[0]]:
        terms = [index_of(_encode(m[None], p)[0])]
    else:
        rest1 = (m[None] - digits) % p
        c1 = _encode(rest1, p)
        hit2 = np.flatnonzero(t1[c1])
        hit3 = np.flatnonzero(t2[c1])
        if hit2.size:
            i = int(hit2[0])
            terms = [i, index_of(c1[i])]
        elif hit3.size:
            i = int(hit3[0])
            terms = [i] + complete_pair(rest1[i])
        elif upper == 4:
            # not a sum of three PT-basic matrices, and the elimination bound gives 4
            best = min(kappa_subsets(d), key=lambda k: rank(partial_transpose(M, k).body))
            cert = make_certificate(M, {best: M}, {"method": "table", "terms": 4})
            return cert.value, cert
        else:
            raise BudgetExceeded("table oracle only resolves values up to 4")
    parts: dict = {}
    for kappa, dig in chosen(*terms):
        H = M.with_body(dig.reshape(n**d, n**d))
        parts[kappa] = parts[kappa] + H if kappa in parts else H
    cert = make_certificate(M, parts, {"method": "table", "terms": len(terms)})
    verify_pt_certificate(cert)
    if cert.value != len(terms):
        raise AssertionError("table witness value mismatch")
    return cert.value, cert


# --------------------------------------------------------------------------
# Heuristic search


def _peel_term(X: np.ndarray, field: Field):
    """One rank-one term u v^T of X from elimination (first pivot)."""
    terms = rank_factorization(Matrix(X, field))
    u, v = terms[0]
    return field.reduce(np.multiply.outer(u, v))


def pt_rank_search(M: HyperMatrix, strategy: str = "greedy-peel", seed: int = 0,
                   restarts: int = 8, steps: int = 200) -> PTCertificate:
    """Upper-bound certificates for PT-rank.

    Strategies:
        single-kappa: all of M on the kappa minimizing rank(M^{T kappa}).
        greedy-peel: repeatedly subtract a rank-one PT-basic term taken from
            the kappa with the currently smallest partial-transpose rank.  That
            rank drops by one each step, so the value never exceeds single-kappa.
        restart-local: seeded local search over rank-one transfers between
            parts, restarted from randomized greedy solutions; keeps the best.
    """
    field = M.field
    keys = kappa_subsets(M.d)
    if strategy == "single-kappa":
        best = min(keys, key=lambda k: rank(partial_transpose(M, k).body))
        return make_certificate(M, {best: M}, {"strategy": strategy})
    if isinstance(field, ComplexField) and strategy != "single-kappa":
        raise ValueError("peeling strategies need an exact field")
    if strategy == "greedy-peel":
        return _greedy(M, keys, None)
    if strategy == "restart-local":
        rng = np.random.default_rng(seed)
        best = _greedy(M, keys, None)
        for r in range(restarts):
            cand = _greedy(M, keys, rng) if r else best
            cand = _local(cand, keys, rng, steps)
            if cand.value < best.value:
                best = cand
        best.metadata = {"strategy": strategy, "seed": seed, "restarts": restarts}
        return best
    raise ValueError(f"unknown strategy {strategy!r}")


def _greedy(M: HyperMatrix, keys, rng) -> PTCertificate:
    field = M.field
    n, d = M.n, M.d
    R = np.array(M.data, copy=True)
    parts = {k: field.zeros(R.shape) for k in keys}
    while not field.is_zero(R):
        ranks = [(rank(Matrix(_pt_array(R, n, d, k), field)), i, k) for i, k in enumerate(keys)]
        if rng is not None:
            low = min(r for r, _, _ in ranks)
            pool = [k for r, _, k in ranks if r <= low + 1]
            kappa = pool[rng.integers(len(pool))]
        else:
            kappa = min(ranks)[2]
        img = _pt_array(R, n, d, kappa)
        term = _pt_array(_peel_term(img, field), n, d, kappa)
        parts[kappa] = field.reduce(parts[kappa] + term)
        R = field.reduce(R - term)
    hm = {k: M.with_body(v) for k, v in parts.items()}
    return make_certificate(M, hm, {"strategy": "greedy-peel"})


def _local(cert: PTCertificate, keys, rng, steps: int) -> PTCertificate:
    M = cert.target
    field = M.field
    n, d = M.n, M.d
    parts = {k: np.array(cert.parts[k].data) if k in cert.parts else field.zeros((M.size, M.size))
             for k in keys}

    def value(ps):
        return sum(rank(Matrix(_pt_array(v, n, d, k), field)) for k, v in ps.items())

    cur = value(parts)
    for _ in range(steps):
        if len(keys) < 2:
            break
        a, b = rng.choice(len(keys), size=2, replace=False)
        ka, kb = keys[a], keys[b]
        img = _pt_array(parts[ka], n, d, ka)
        if field.is_zero(img) or rng.random() < 0.3:
            # random PT-basic transfer in kb's frame
            u = field.random(rng, M.size)
            v = field.random(rng, M.size)
            term = _pt_array(field.reduce(np.multiply.outer(u, v)), n, d, kb)
        else:
            term = _pt_array(_peel_term(img, field), n, d, ka)
        trial = dict(parts)
        trial[ka] = field.reduce(parts[ka] - term)
        trial[kb] = field.reduce(parts[kb] + term)
        val = value(trial)
        if val <= cur:
            parts, cur = trial, val
    hm = {k: M.with_body(v) for k, v in parts.items()}
    return make_certificate(M, hm, {"strategy": "restart-local"})


# --------------------------------------------------------------------------
# Kronecker action, regrouping, rank growth


def kron_act(M: HyperMatrix, Bs, cert: PTCertificate | None = None):
    """PM = (B_1 (x) ... (x) B_d) M, transporting a certificate part by part.

    Returns:
        (PM, certificate for PM or None).
    """
    if len(Bs) != M.d:
        raise ValueError(f"need {M.d} factors, got {len(Bs)}")
    for B in Bs:
        if B.shape != (M.n, M.n):
            raise ValueError("each factor must be n x n")
    P = Bs[0]
    for B in Bs[1:]:
        P = kron(P, B)
    PM = HyperMatrix(M.n, M.d, P @ M.body)
    if cert is None:
        return PM, None
    parts = {k: HyperMatrix(M.n, M.d, P @ N.body) for k, N in cert.parts.items()}
    out = make_certificate(PM, parts, {"transported_from": cert.value})
    return PM, out


def regroup(M: HyperMatrix, p: int, q: int) -> HyperMatrix:
    """View an n^d x n^d matrix with d = p*q over q blocks of size n^p."""
    if p * q != M.d:
        raise ValueError(f"p*q = {p * q} differs from d = {M.d}")
    return HyperMatrix(M.n**p, q, M.body)


def refine_certificate(cert: PTCertificate, n: int, p: int) -> PTCertificate:
    """Map a certificate over [n^p]^q to one over [n]^{pq}; each coarse block k becomes the run of fine blocks."""
    q = cert.d
    if n**p != cert.n:
        raise ValueError("block size mismatch")
    fine_target = HyperMatrix(n, p * q, cert.target.body)
    parts = {}
    for lam, N in cert.parts.items():
        kappa = tuple(k + (l - 1) * p for l in lam for k in range(1, p + 1))
        parts[kappa] = HyperMatrix(n, p * q, N.body)
    meta = dict(cert.metadata)
    meta["refined_from"] = {"n": cert.n, "d": q, "value": cert.value}
    return make_certificate(fine_target, parts, meta)


def transpose_rank_growth(M: HyperMatrix, kappa, factors) -> list:
    """Factorization of M^{T kappa} with at most r * n^{2 min(|kappa|, d-|kappa|)} terms.

    ``factors`` is a list of (a, b) vectors of length n^d with M = sum a b^T.
    For a term a b^T and multi-indices x, y over kappa the new term is
    u(i) = [i_kappa = y] a(i with kappa-part x),  v(j) = [j_kappa = x] b(j with kappa-part y).
    When |kappa| > d/2 the complement is expanded and each term transposed,
    since M^{T kappa} is the transpose of M^{T complement}.
    """
    field = M.field
    n, d = M.n, M.d
    size = n**d
    check = field.zeros((size, size))
    for a, b in factors:
        check = field.reduce(check + np.multiply.outer(np.asarray(a), np.asarray(b)))
    if not field.equal(check, M.data):
        raise ValueError("factorization does not reassemble M")
    kappa = tuple(sorted(set(kappa)))
    comp = tuple(k for k in range(1, d + 1) if k not in kappa)
    swap = len(kappa) > d / 2
    K = comp if swap else kappa
    idx = np.indices((n,) * d).reshape(d, -1)          # idx[k-1, flat] = i_k
    out = []
    for a, b in factors:
        a = np.asarray(a).reshape((n,) * d)
        b = np.asarray(b).reshape((n,) * d)
        for x in itertools.product(range(n), repeat=len(K)):
            for y in itertools.product(range(n), repeat=len(K)):
                sel_i = np.ones(size, dtype=bool)
                sel_j = np.ones(size, dtype=bool)
                ai = list(idx)
                bj = list(idx)
                for t, k in enumerate(K):
                    sel_i &= idx[k - 1] == y[t]
                    sel_j &= idx[k - 1] == x[t]
                    ai[k - 1] = np.full(size, x[t])
                    bj[k - 1] = np.full(size, y[t])
                u = np.where(sel_i, a[tuple(ai)], 0)
                v = np.where(sel_j, b[tuple(bj)], 0)
                u, v = field.elements(u), field.elements(v)
                if swap:
                    u, v = v, u
                if field.is_zero(u) or field.is_zero(v):
                    continue
                out.append((u, v))
    return out


# --------------------------------------------------------------------------
# Census


def fully_symmetric_orbits(n: int, d: int) -> np.ndarray:
    """Orbit id of every entry position under the partial-transpose action."""
    size = n**d
    orbit = -np.ones(size * size, dtype=np.int64)
    pos = np.arange(size * size).reshape(size, size)
    images = [_pt_array(pos, n, d, k).reshape(-1) for k in kappa_subsets(d, full=True)]
    nxt = 0
    for start in range(size * size):
        if orbit[start] >= 0:
            continue
        # entry t of the kappa-transpose holds position images[kappa][t]
        members = {int(img[start]) for img in images}
        for m in members:
            orbit[m] = nxt
        nxt += 1
    return orbit


def _sumset_levels(p: int, n: int, d: int, limit: int = 1 << 20):
    """PT-rank of every matrix in the space via iterated sumsets with the basic set."""
    N = n ** (2 * d)
    space = p**N
    if space > limit:
        raise BudgetExceeded(f"exhaustive census over {space} matrices exceeds {limit}")
    _, digits, _, _, _, _ = _basic_table(p, n, d)
    all_digits = _digits(np.arange(space, dtype=np.int64), p, N)
    value = np.full(space, -1, dtype=np.int64)
    level = np.zeros(space, dtype=bool)
    level[0] = True
    value[0] = 0
    k = 0
    while (value < 0).any():
        k += 1
        new = level.copy()
        members = all_digits[level]
        for row in digits:
            new[_encode((members + row) % p, p)] = True
        value[new & (value < 0)] = k
        level = new
    return value


def ptrank_census(n: int, d: int, field: Field, mode: str = "exhaustive", count: int = 100,
                  seed: int = 0, symmetry: str = "all") -> dict:
    """Histogram of exact PT-rank values over a population of matrices.

    Args:
        mode: ``"exhaustive"`` (whole population) or ``"sample"`` (``count``
            uniform draws from the population, seeded).
        symmetry: ``"all"`` or ``"fully-symmetric"``.

    Returns:
        dict with ``histogram`` (value -> count), ``population`` and ``evaluated``.
    """
    _require_finite(field)
    p = field.p
    N = n ** (2 * d)
    rng = np.random.default_rng(seed)
    if symmetry == "all":
        population = p**N
        if mode == "exhaustive":
            values = _sumset_levels(p, n, d)
            codes = None
        else:
            codes = rng.integers(0, population, size=count, dtype=np.int64) if population < 2**62 else None
            mats = _digits(codes, p, N)
    elif symmetry == "fully-symmetric":
        orbit = fully_symmetric_orbits(n, d)
        k = int(orbit.max()) + 1
        population = p**k
        if mode == "exhaustive":
            ocodes = np.arange(population, dtype=np.int64)
        else:
            ocodes = rng.integers(0, population, size=count, dtype=np.int64)
        mats = _digits(ocodes, p, k)[:, orbit]
        codes = ocodes
    else:
        raise ValueError(f"unknown symmetry {symmetry!r}")

    if symmetry == "all" and mode == "exhaustive":
        hist = np.bincount(values)
        evaluated = population
        method = "sumset"
    else:
        try:
            _basic_table(p, n, d)
            method = "table"
        except BudgetExceeded:
            method = "exhaustive"
        vals = []
        for row in mats:
            M = HyperMatrix.from_array(n, d, row, field)
            v, _ = pt_rank_exact(M, method=method)
            vals.append(v)
        hist = np.bincount(np.array(vals, dtype=np.int64)) if vals else np.zeros(0, dtype=np.int64)
        evaluated = len(vals)
    histogram = {int(v): int(c) for v, c in enumerate(hist) if c}
    return {"n": n, "d": d, "field": str(field), "mode": mode, "symmetry": symmetry,
            "seed": seed, "population": int(population), "evaluated": int(evaluated),
            "method": method, "histogram": histogram}


# --------------------------------------------------------------------------
# Worked examples


def example_3_squared(field: Field) -> HyperMatrix:
    """The 9 x 9 swap matrix (rows (a,b) -> column (b,a)), n=3, d=2."""
    P = np.zeros((9, 9), dtype=np.int64)
    for a in range(3):
        for b in range(3):
            P[3 * a + b, 3 * b + a] = 1
    return HyperMatrix.from_array(3, 2, P, field)


def example_identity_certificate(field: Field) -> PTCertificate:
    """The two-part decomposition I_4 = N_{} + N_{1} with value 2."""
    N0 = np.array([[1, 0, 0, -1], [0, 0, 0, 0], [0, 0, 0, 0], [-1, 0, 0, 1]])
    P1 = np.array([[0, 0, 0, 0], [0, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 0]])
    N1 = _pt_array(P1, 2, 2, (1,))
    M = HyperMatrix.identity(2, 2, field)
    parts = {(): HyperMatrix.from_array(2, 2, N0, field), (1,): HyperMatrix.from_array(2, 2, N1, field)}
    return make_certificate(M, parts, {"source": "worked example"})
