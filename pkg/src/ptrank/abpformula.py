"""Ordered algebraic branching programs and set-multilinear formulas.

Both models compute set-multilinear polynomials over blocks 1..L (one block per
path edge), each block having an alphabet of size m (usually m = n^2, with
variable <a, b> = a*n + b).  Evaluation returns the coefficient tensor.

The limitation pipeline turns an ABP for the shifted tensor of M into a PT
certificate for M: cut the program in the middle, restrict the padded end
coordinates, factor the resulting matrix into pairs (B_l, C_l), push a coarse
identity certificate through the Kronecker action of each pair and refine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .fieldlinalg import Field, Matrix, rank, rank_factorization
from .pathmeasures import PathGraph, rho_exact, rho_padded
from .ptcore import (
    DEFAULT_BUDGET, PTCertificate, kron_act, make_certificate, pt_rank_exact,
    refine_certificate, regroup, sum_certificates, verify_pt_certificate,
)
from .tensorspace import HyperMatrix, Tensor, shifted_tensor, shifted_to_matrix, unflat

__all__ = [
    "OrderedABP", "abp_eval", "abp_for_imm", "abp_for_shifted", "abp_middle_cut", "MiddleCut",
    "abp_to_pt_cert", "Leaf", "Plus", "Times", "formula_eval", "formula_blocks", "leaves",
    "random_formula", "imm_formula", "main_theorem_check",
]


# --------------------------------------------------------------------------
# Ordered ABPs


@dataclass
class OrderedABP:
    """f = v1^T M_1 ... M_L v2 with layer i linear in block i.

    ``layers[i]`` has shape (w_i, w_{i+1}, m): entry (a, b) is the coefficient
    vector of a linear form in the m variables of block i+1.
    """

    m: int
    layers: list
    v1: np.ndarray
    v2: np.ndarray
    field: Field

    def __post_init__(self):
        self.layers = [self.field.elements(np.asarray(L)) for L in self.layers]
        self.v1 = self.field.elements(np.asarray(self.v1))
        self.v2 = self.field.elements(np.asarray(self.v2))
        if not self.layers:
            raise ValueError("an ABP needs at least one layer")
        prev = self.v1.shape[0]
        for i, L in enumerate(self.layers):
            if L.ndim != 3 or L.shape[0] != prev or L.shape[2] != self.m:
                raise ValueError(f"layer {i + 1} has shape {L.shape}, expected ({prev}, *, {self.m})")
            prev = L.shape[1]
        if self.v2.shape != (prev,):
            raise ValueError("end vector does not match the last layer")

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def widths(self) -> list:
        return [self.v1.shape[0]] + [L.shape[1] for L in self.layers]

    @property
    def size(self) -> int:
        return sum(self.widths)


def _abp_segment(abp: OrderedABP, lo: int, hi: int, start=None) -> np.ndarray:
    """Coefficients of the partial product over layers lo..hi-1 (0-based).

    Returns shape (w_lo, m, ..., m, w_hi), or (m, ..., m, w_hi) when ``start`` is
    a boundary vector.
    """
    f = abp.field
    w = abp.widths[lo]
    state = f.eye(w) if start is None else start.reshape(1, w)
    lead = state.shape[:-1]
    state = state.reshape(-1, w)
    for L in abp.layers[lo:hi]:
        # state (R, w) x L (w, w', m) -> (R, m, w')
        nxt = np.einsum("ra,abx->rxb", state, L)
        state = f.reduce(nxt.reshape(-1, L.shape[1]))
    shape = lead + (abp.m,) * (hi - lo) + (abp.widths[hi],)
    return state.reshape(shape)


def abp_eval(abp: OrderedABP) -> Tensor:
    """Coefficient tensor over [m]^L with labels 1..L."""
    f = abp.field
    T = _abp_segment(abp, 0, abp.depth, start=abp.v1)
    out = f.reduce(np.tensordot(T, abp.v2, axes=([-1], [0])))
    return Tensor(abp.m, tuple(range(1, abp.depth + 1)), out, f)


def abp_for_imm(n: int, d: int, field: Field, corner: bool = False) -> OrderedABP:
    """Width-n program for IMM_{n,d}: M_k[a, b] = X^{(k)}_{<a, b>}.

    With ``corner`` the boundary vectors are e_first instead of all-ones.
    """
    L = np.zeros((n, n, n * n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            L[a, b, a * n + b] = 1
    ends = np.eye(n, dtype=np.int64)[0] if corner else np.ones(n, dtype=np.int64)
    return OrderedABP(n * n, [L] * d, ends, ends, field)


def abp_for_shifted(M: HyperMatrix) -> OrderedABP:
    """Generic program for the shifted tensor of M.

    The state after edge k is the index sequence read so far
    (i_1, j_1, ..., j_{k-1}, i_k); width n^{2k-1}.
    """
    n, d = M.n, M.d
    f = M.field
    m = n * n
    blocks = M.blocks()
    layers = []
    first = np.zeros((1, n, m), dtype=np.int64)
    for i in range(n):
        first[0, i, 0 * n + i] = 1                       # <p, i_1> with p = first
    layers.append(first)
    for k in range(2, d + 1):
        w_in = n ** (2 * k - 3)
        L = np.zeros((w_in, w_in * n * n, m), dtype=np.int64)
        for s in range(w_in):
            for j in range(n):
                for i in range(n):
                    L[s, (s * n + j) * n + i, j * n + i] = 1
        layers.append(L)
    w_in = n ** (2 * d - 1)
    last = f.zeros((w_in, 1, m))
    for s in range(w_in):
        seq = list(np.unravel_index(s, (n,) * (2 * d - 1)))
        ii = seq[0::2]
        jj = seq[1::2]
        for j in range(n):
            last[s, 0, j * n + 0] = blocks[tuple(ii) + tuple(jj) + (j,)]   # <j_d, q> with q = first
    layers.append(last)
    return OrderedABP(m, layers, np.ones(1, dtype=np.int64), np.ones(1, dtype=np.int64), f)


@dataclass
class MiddleCut:
    """Explicit factorization of the balanced flattening of an ABP's tensor.

    ``pairs`` are (left, right) vectors whose outer products sum to the
    flattening; left coordinates are those of edges 1..c-1 followed by the first
    half of edge c, right coordinates are the rest.  When the tensor is a
    shifted tensor, ``restricted`` holds the pairs with the padded end
    coordinates fixed to the first index, and ``matrix`` their sum.
    """

    cut: int
    pairs: list
    flattening_rank: int
    width_bound: int
    coarse_bound: int
    target: HyperMatrix | None = None
    restricted: list = dc_field(default_factory=list)
    matrix: Matrix | None = None


def abp_middle_cut(abp: OrderedABP, M: HyperMatrix | None = None) -> MiddleCut:
    """Cut the program at layer ceil(L/2).

    Args:
        abp: program over blocks with alphabet n^2.
        M: if given, the program must compute shifted_tensor(M); if omitted the
            restriction step runs only when the evaluated tensor is shifted.
    """
    f = abp.field
    n = math.isqrt(abp.m)
    if n * n != abp.m:
        raise ValueError("block alphabet must be a square")
    Lc = abp.depth
    c = (Lc + 1) // 2                       # 1-based index of the cut layer
    A = abp_eval(abp)
    if M is not None:
        if shifted_tensor(M).data.shape != A.data.shape or not f.equal(shifted_tensor(M).data, A.data):
            raise ValueError("the program does not compute the shifted tensor of M")
    elif Lc >= 2:
        cand, exact = shifted_to_matrix(A)
        M = cand if exact else None

    pre = _abp_segment(abp, 0, c - 1, start=abp.v1)          # (m,)*(c-1) + (w,)
    suf = _abp_segment(abp, c, Lc)                            # (w',) + (m,)*(Lc-c) + (w'',)
    suf = f.reduce(np.tensordot(suf, abp.v2, axes=([-1], [0])))
    mid = abp.layers[c - 1].reshape(abp.layers[c - 1].shape[:2] + (n, n))
    left_len, right_len = n ** (2 * (c - 1)) * n, n * n ** (2 * (Lc - c))
    pre = pre.reshape(-1, pre.shape[-1])                      # (m^{c-1}, w)
    suf = suf.reshape(suf.shape[0], -1)                       # (w', m^{Lc-c})
    pairs = []
    for a in range(pre.shape[1]):
        for b in range(suf.shape[0]):
            block = Matrix(mid[a, b], f)
            if block.is_zero():
                continue
            for u, v in rank_factorization(block):
                left = f.reduce(np.multiply.outer(pre[:, a], u).reshape(left_len))
                right = f.reduce(np.multiply.outer(v, suf[b]).reshape(right_len))
                if f.nonzero_mask(left).any() and f.nonzero_mask(right).any():
                    pairs.append((left, right))
    flat = unflat(A).data.reshape(left_len, right_len)
    recon = f.zeros((left_len, right_len))
    for u, v in pairs:
        recon = f.reduce(recon + np.multiply.outer(u, v))
    if not f.equal(recon, flat):
        raise AssertionError("middle-cut factors do not reassemble the flattening")
    w = max(abp.widths)
    out = MiddleCut(c, pairs, rank(Matrix(flat, f)),
                    abp.widths[c - 1] * abp.widths[c] * n, w * w * n * n, M)
    if M is not None:
        # fix p and q to the first index: left coordinate 0 is p, right coordinate -1 is q
        restricted = []
        for u, v in pairs:
            ur = u.reshape(n, -1)[0]
            vr = v.reshape(-1, n)[:, 0]
            if f.nonzero_mask(ur).any() and f.nonzero_mask(vr).any():
                restricted.append((ur, vr))
        R = f.zeros((len(pairs[0][0]) // n if pairs else 1, len(pairs[0][1]) // n if pairs else 1))
        for u, v in restricted:
            R = f.reduce(R + np.multiply.outer(u, v))
        out.restricted, out.matrix = restricted, Matrix(R, f)
    return out


def _realigned_to_square(vec: np.ndarray, n: int, h: int) -> np.ndarray:
    """Vector over (i_1, j_1, ..., i_h, j_h) -> n^h x n^h matrix with rows (i) and columns (j)."""
    t = vec.reshape((n,) * (2 * h))
    perm = [2 * k for k in range(h)] + [2 * k + 1 for k in range(h)]
    return t.transpose(perm).reshape(n**h, n**h)


def _trivial_identity(N: int, field: Field) -> PTCertificate:
    I = HyperMatrix.identity(N, 2, field)
    return make_certificate(I, {(): I}, {"provider": "trivial"})


def _provider_certificate(N: int, field: Field, provider) -> PTCertificate:
    if callable(provider):
        return provider(N, field)
    if provider == "trivial" or N == 1:
        return _trivial_identity(N, field)
    if provider == "builtin":
        if N not in (2, 4, 8):
            raise ValueError(f"no built-in provider for coarse size {N}")
        from .soslink import _builtin_provider
        cert = _builtin_provider(N, field)
        cert.metadata["provider"] = "composition-identity"
        return cert
    raise ValueError(f"unknown provider {provider!r}")


def abp_to_pt_cert(abp: OrderedABP, M: HyperMatrix | None = None,
                   provider="builtin") -> PTCertificate:
    """PT certificate for M from a program computing shifted_tensor(M).

    The program must have an odd number L of layers, so M has d = L - 1 = 2h
    blocks and the coarse size is N = n^h.  ``provider`` is ``"builtin"``
    (composition identities, N in {2, 4, 8}), ``"trivial"`` or a callable
    ``(N, field) -> PTCertificate`` for I_{N^2} over [N]^2.
    """
    f = abp.field
    if abp.depth % 2 == 0:
        raise ValueError("the pipeline needs an odd number of layers")
    cut = abp_middle_cut(abp, M)
    if cut.target is None:
        raise ValueError("the program does not compute a shifted tensor")
    M = cut.target
    n, d = M.n, M.d
    h = d // 2
    N = n**h
    coarse = _provider_certificate(N, f, provider)
    verify_pt_certificate(coarse)
    if coarse.target != HyperMatrix.identity(N, 2, f):
        raise ValueError("provider certificate has the wrong target")
    factors = rank_factorization(cut.matrix) if not cut.matrix.is_zero() else []
    certs = []
    for u, v in factors:
        B = Matrix(_realigned_to_square(u, n, h), f)
        C = Matrix(_realigned_to_square(v, n, h), f)
        _, c = kron_act(coarse.target, [B, C], coarse)
        certs.append(c)
    target = regroup(M, h, 2)
    if certs:
        summed = sum_certificates(certs, target)
    else:
        summed = make_certificate(target, {})
    fine = refine_certificate(summed, n, h)
    chain = [
        {"step": "middle cut", "layer": cut.cut, "abp_pairs": len(cut.pairs),
         "restricted_pairs": len(cut.restricted), "width_bound": cut.width_bound,
         "coarse_bound": cut.coarse_bound},
        {"step": "rank factorization", "pairs": len(factors),
         "restricted_rank": rank(cut.matrix)},
        {"step": "provider", "coarse_size": N, "provider_value": coarse.value,
         "source": coarse.metadata.get("provider", "callable")},
        {"step": "kron action", "pair_values": [c.value for c in certs],
         "bound": len(factors) * coarse.value},
        {"step": "subadditivity", "summed_value": summed.value},
        {"step": "refine", "value": fine.value},
    ]
    fine.metadata = {"pipeline": "limitation", "chain": chain}
    verify_pt_certificate(fine)
    if fine.value > len(factors) * coarse.value:
        raise AssertionError("certificate value exceeds the pair bound")
    return fine


# --------------------------------------------------------------------------
# Set-multilinear formulas


@dataclass(frozen=True)
class Leaf:
    block: int
    var: int
    scalar: int = 1


@dataclass(frozen=True)
class Plus:
    children: tuple


@dataclass(frozen=True)
class Times:
    children: tuple


def formula_blocks(f) -> frozenset:
    """Block set of a node; raises on a multilinearity violation."""
    if isinstance(f, Leaf):
        return frozenset([f.block])
    if isinstance(f, Plus):
        sets = {formula_blocks(c) for c in f.children}
        if len(sets) != 1:
            raise ValueError("plus node children use different block sets")
        return sets.pop()
    if isinstance(f, Times):
        out = frozenset()
        for c in f.children:
            b = formula_blocks(c)
            if out & b:
                raise ValueError("times node operands share a block")
            out |= b
        return out
    raise TypeError(f"not a formula node: {f!r}")


def leaves(f) -> int:
    if isinstance(f, Leaf):
        return 1
    return sum(leaves(c) for c in f.children)


def formula_eval(f, m: int, field: Field) -> Tensor:
    """Coefficient tensor over [m]^{blocks} with labels the sorted block numbers."""
    blocks = sorted(formula_blocks(f))

    def ev(node) -> Tensor:
        if isinstance(node, Leaf):
            data = field.zeros((m,))
            data[node.var] = field.scalar(node.scalar)
            return Tensor(m, (node.block,), data, field)
        if isinstance(node, Plus):
            parts = [ev(c) for c in node.children]
            labels = parts[0].labels
            total = parts[0]
            for p in parts[1:]:
                total = total + p.reorder(labels)
            return total
        parts = [ev(c) for c in node.children]
        out = parts[0]
        for p in parts[1:]:
            data = field.reduce(np.multiply.outer(out.data, p.data))
            out = Tensor(m, out.labels + p.labels, data, field)
        return out

    return ev(f).reorder(blocks)


def random_formula(blocks, m: int, rng: np.random.Generator, depth: int = 4, fanin: int = 3,
                   p: int = 2, pin_ends: bool = False):
    """Random set-multilinear formula; times nodes split the block list contiguously.

    With ``pin_ends`` (m = n^2) leaves of the first block only use variables
    <first, *> and leaves of the last block only <*, first>, so the result is a
    shifted tensor when the blocks form a path.
    """
    blocks = list(blocks)
    n = math.isqrt(m)

    def leaf(b):
        var = int(rng.integers(m))
        if pin_ends and b == blocks[0]:
            var = int(rng.integers(n))
        elif pin_ends and b == blocks[-1]:
            var = int(rng.integers(n)) * n
        return Leaf(b, var, int(rng.integers(1, p)) if p > 2 else 1)

    def gen(bs, dep):
        if len(bs) == 1 and (dep == 0 or rng.random() < 0.4):
            return leaf(bs[0])
        if dep == 0:
            return Times(tuple(leaf(b) for b in bs))
        if len(bs) > 1 and rng.random() < 0.6:
            k = int(rng.integers(2, min(fanin, len(bs)) + 1))
            cuts = sorted(rng.choice(np.arange(1, len(bs)), size=k - 1, replace=False).tolist())
            pieces = [bs[a:b] for a, b in zip([0] + cuts, cuts + [len(bs)])]
            return Times(tuple(gen(pc, dep - 1) for pc in pieces))
        k = int(rng.integers(2, fanin + 1))
        return Plus(tuple(gen(bs, dep - 1) for _ in range(k)))

    return gen(blocks, depth)


def imm_formula(n: int, d: int, corner: bool = False):
    """Formula for IMM_{n,d} built by expanding along the matrix chain.

    For n = 2, d = 2 without corner pinning it has 8 leaves.
    """
    starts = [0] if corner else list(range(n))
    ends = [0] if corner else list(range(n))

    def rest(k, a):
        # blocks k..d given the row index a of block k
        if k == d:
            return Plus(tuple(Leaf(k, a * n + b) for b in ends)) if len(ends) > 1 else Leaf(k, a * n + ends[0])
        return Plus(tuple(Times((Leaf(k, a * n + c), rest(k + 1, c))) for c in range(n)))

    if d == 1:
        return Plus(tuple(Leaf(1, a * n + b) for a in starts for b in ends))
    terms = []
    for c in range(n):
        first = Plus(tuple(Leaf(1, a * n + c) for a in starts)) if len(starts) > 1 else Leaf(1, starts[0] * n + c)
        terms.append(Times((first, rest(2, c))))
    return Plus(tuple(terms))


def main_theorem_check(f, n: int, field: Field, G: PathGraph | None = None,
                       budget: int = DEFAULT_BUDGET, check_shifted: bool = True) -> dict:
    """One-sided check of the formula lower bound on a concrete formula.

    Asserts leaves(f) >= n^{log ell(G)} rho(A) where A^flat = formula_eval(f); when
    A is the shifted tensor of some M also asserts
    leaves(f) >= PT-rank(M) / n^{d - log d + 1}.
    """
    blocks = sorted(formula_blocks(f))
    G = PathGraph(blocks) if G is None else G
    if list(G.edges) != blocks:
        raise ValueError("formula blocks do not match the graph edges")
    F = formula_eval(f, n * n, field)
    A = unflat(F)
    path = len(blocks) >= 2 and G.components() == [tuple(range(1, len(blocks) + 1))]
    M, exact = shifted_to_matrix(F) if path else (None, False)
    res = rho_padded(A, budget=budget) if exact else rho_exact(A, G, budget=budget)
    L = leaves(f)
    ell = G.ell
    factor = _power_of(n, ell)
    bound = factor * res.value
    ok = _ge(L, bound)
    report = {"leaves": L, "ell": ell, "rho": str(res.value), "bound": float(bound),
              "size_bound": float(n * bound), "margin": float(L / bound) if bound else None,
              "violation": not ok}
    if check_shifted and path:
        if exact:
            d = M.d
            pt, _ = pt_rank_exact(M, budget=budget)
            denom = _power_of(n, d, shift=d + 1, negate_log=True)
            pbound = pt / denom
            pok = _ge(L, pbound)
            report.update({"shifted": True, "d": d, "pt_rank": pt, "pt_bound": float(pbound),
                           "violation": report["violation"] or not pok})
        else:
            report["shifted"] = False
    return report


def _power_of(n: int, x: int, shift: int = 0, negate_log: bool = False):
    """n^{shift +- log2 x}, exact (Fraction) when log2 x or log2 n is an integer, else float."""
    lg = math.log2(x)
    sign = -1 if negate_log else 1
    if lg.is_integer():
        e = shift + sign * int(lg)
        return Fraction(n) ** e
    lgn = math.log2(n)
    if lgn.is_integer():
        # n^{log2 x} = x^{log2 n}
        base = Fraction(x) ** int(lgn)
        return Fraction(n) ** shift * (base if sign > 0 else 1 / base)
    return n ** (shift + sign * lg)


def _ge(a, b) -> bool:
    if isinstance(b, float):
        return a >= b * (1 - 1e-12)
    return Fraction(a) >= b
