"""Path subgraphs, orientations, relative rank and the measure rho.

Vertices of Path_Z are integers v; edge ``i`` joins v_{i-1} and v_i.  A tensor on
a graph G has one coordinate per directed edge (u, v) of G, labelled by the tuple
``(u, v)`` in the order produced by :func:`ptrank.tensorspace.path_labels`.

An orientation gamma in P(S) stores one bit per vertex of S (bit t belongs to the
t-th smallest vertex).  Bit 0 sends the left directed edge (v, v-1) to I and the
right one (v, v+1) to J; bit 1 does the opposite.

Slice restriction.  For a padded tensor every nonzero entry has p = q = first.
Restricting each part X_alpha of a decomposition to that slice keeps the sum
equal to the padded tensor, and for every gamma the restricted flattening is a
submatrix of the unrestricted one (the two fixed coordinates sit on one side or
the other), so the minimum over decompositions is unchanged.  On slice supported
tensors complementary alphas give transposed flattenings, so parts with
complementary alphas can be merged; keeping the alphas whose bit at the last
internal vertex is 0 loses nothing.  These alphas correspond to kappa in [d-1].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fieldlinalg import Field, PrimeField, batch_rank, rank
from .ptcore import (
    BudgetExceeded, DEFAULT_BUDGET, _digits, canonical_kappa, is_pt_basic, kappa_subsets, kron_act,
    make_certificate, partial_transpose, pt_rank_exact, verify_pt_certificate,
)
from .fieldlinalg import random_nonsingular
from .tensorspace import HyperMatrix, Tensor, flatten_mat, padded_tensor, path_labels, tensor_product

__all__ = [
    "PathGraph", "Orientation", "RelValue", "graph_analyze", "orientations",
    "gamma_delta_pm", "relrk", "relrk_path", "rho_from_decomposition", "rho_exact",
    "RhoResult", "rho_padded", "rho_pt_identity_check", "padded_decomposition", "lemma_suite",
    "dimension_exponent",
]


# --------------------------------------------------------------------------
# Graphs and orientations


@dataclass(frozen=True)
class PathGraph:
    """Finite subgraph of Path_Z given by its edge set (edge i = {v_{i-1}, v_i})."""

    edges: tuple

    def __init__(self, edges):
        edges = tuple(sorted(set(int(e) for e in edges)))
        if not edges:
            raise ValueError("a path graph needs at least one edge")
        object.__setattr__(self, "edges", edges)

    @property
    def vertices(self) -> tuple:
        return tuple(sorted({v for e in self.edges for v in (e - 1, e)}))

    def degree(self, v: int) -> int:
        return (v in self.edges) + ((v + 1) in self.edges)

    @property
    def V1(self) -> tuple:
        return tuple(v for v in self.vertices if self.degree(v) == 1)

    @property
    def V2(self) -> tuple:
        return tuple(v for v in self.vertices if self.degree(v) == 2)

    @property
    def D(self) -> tuple:
        return path_labels(self.edges)

    @property
    def D1(self) -> tuple:
        v1 = set(self.V1)
        return tuple(lab for lab in self.D if lab[0] in v1)

    @property
    def D2(self) -> tuple:
        v2 = set(self.V2)
        return tuple(lab for lab in self.D if lab[0] in v2)

    def components(self) -> list[tuple]:
        comps, run = [], [self.edges[0]]
        for e in self.edges[1:]:
            if e == run[-1] + 1:
                run.append(e)
            else:
                comps.append(tuple(run))
                run = [e]
        comps.append(tuple(run))
        return comps

    @property
    def ell(self) -> int:
        return max(len(c) for c in self.components())

    def union(self, other: "PathGraph") -> "PathGraph":
        if set(self.edges) & set(other.edges):
            raise ValueError("graphs are not edge-disjoint")
        return PathGraph(self.edges + other.edges)


def graph_analyze(G: PathGraph) -> dict:
    return {"V1": G.V1, "V2": G.V2, "D1": G.D1, "D2": G.D2,
            "components": G.components(), "ell": G.ell}


@dataclass(frozen=True)
class Orientation:
    """An element of P(S): ``bits`` bit t is the choice at the t-th smallest vertex of S."""

    S: tuple
    bits: int = 0

    def __post_init__(self):
        object.__setattr__(self, "S", tuple(sorted(self.S)))
        if not 0 <= self.bits < 2 ** len(self.S):
            raise ValueError("bits out of range")

    def bit(self, v: int) -> int:
        return (self.bits >> self.S.index(v)) & 1

    @property
    def I(self) -> frozenset:
        return frozenset((v, v + 1) if self.bit(v) else (v, v - 1) for v in self.S)

    @property
    def J(self) -> frozenset:
        return frozenset((v, v - 1) if self.bit(v) else (v, v + 1) for v in self.S)

    def __or__(self, other: "Orientation") -> "Orientation":
        if set(self.S) & set(other.S):
            raise ValueError("orientations on overlapping vertex sets")
        S = tuple(sorted(self.S + other.S))
        bits = 0
        for t, v in enumerate(S):
            b = self.bit(v) if v in self.S else other.bit(v)
            bits |= b << t
        return Orientation(S, bits)

    def restrict(self, S) -> "Orientation":
        S = tuple(sorted(S))
        bits = 0
        for t, v in enumerate(S):
            bits |= self.bit(v) << t
        return Orientation(S, bits)

    @classmethod
    def from_sets(cls, S, I) -> "Orientation":
        S = tuple(sorted(S))
        bits = 0
        for t, v in enumerate(S):
            if (v, v + 1) in I:
                bits |= 1 << t
        return cls(S, bits)


def orientations(S) -> list[Orientation]:
    S = tuple(sorted(S))
    return [Orientation(S, b) for b in range(2 ** len(S))]


def gamma_delta_pm(G: PathGraph, H: PathGraph | None = None):
    """Extremal orientations.

    Without H: (gamma+, gamma-) in P(V_1(G)); gamma+ puts every edge of D_1(G) in I.
    With H (edge-disjoint): (delta+, delta-) in P(V_1(G) & V_1(H)); delta+ puts the
    directed H-edge at each shared vertex in I and the G-edge in J.
    """
    if H is None:
        S = G.V1
        plus = 0
        for t, v in enumerate(S):
            if (v + 1) in G.edges:             # the G-edge at v is on the right
                plus |= 1 << t
        full = 2 ** len(S) - 1
        return Orientation(S, plus), Orientation(S, full ^ plus)
    if set(G.edges) & set(H.edges):
        raise ValueError("graphs are not edge-disjoint")
    S = tuple(sorted(set(G.V1) & set(H.V1)))
    plus = 0
    for t, v in enumerate(S):
        if (v + 1) in H.edges:                 # the H-edge is on the right
            plus |= 1 << t
    full = 2 ** len(S) - 1
    return Orientation(S, plus), Orientation(S, full ^ plus)


# --------------------------------------------------------------------------
# Relative rank


@dataclass(frozen=True)
class RelValue:
    """rank / n^exp as an exact rational."""

    rank: int
    n: int
    exp: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.rank, self.n**self.exp)

    def __lt__(self, other):
        return self.value < _val(other)

    def __le__(self, other):
        return self.value <= _val(other)

    def __float__(self):
        return float(self.value)


def _val(x):
    return x.value if isinstance(x, RelValue) else Fraction(x)


def _sides(G: PathGraph, alpha: Orientation, gamma: Orientation):
    D1 = set(G.D1)
    I = set(alpha.I) | (set(gamma.I) & D1)
    J = set(alpha.J) | (set(gamma.J) & D1)
    if I | J != set(G.D) or I & J:
        raise ValueError("orientations do not match the graph")
    return I, J


def _check_labels(A: Tensor, G: PathGraph):
    if set(A.labels) != set(G.D):
        raise ValueError("tensor labels are not D(G)")


def relrk(A: Tensor, G: PathGraph, alpha: Orientation, gamma: Orientation) -> RelValue:
    """n^{-|E|} rank Mat_{I_alpha + (I_gamma & D1), J_alpha + (J_gamma & D1)}(A)."""
    _check_labels(A, G)
    if alpha.S != G.V2 or gamma.S != G.V1:
        raise ValueError("alpha must live on V2(G) and gamma on V1(G)")
    I, J = _sides(G, alpha, gamma)
    return RelValue(rank(flatten_mat(A, I, J)), A.n, len(G.edges))


def dimension_exponent(G: PathGraph, alpha: Orientation, gamma: Orientation) -> Fraction:
    """Exponent e with relrk <= n^e from the matrix dimensions: min(|I|, |J|) - |E|."""
    I, J = _sides(G, alpha, gamma)
    return Fraction(min(len(I), len(J)) - len(G.edges))


def relrk_path(A: Tensor, a: int, alpha: tuple, b: int) -> RelValue:
    """Relative rank of a tensor on the path v_0..v_d via integer label sets.

    Labels 1..2d stand for (v_0 v_1), (v_1 v_0), (v_1 v_2), ...;
    I = [2d] & {a, 2+alpha_1, ..., 2d-2+alpha_{d-1}, 2d+b} and
    J = [2d] & {1-a, 3-alpha_1, ..., 2d-1-alpha_{d-1}, 2d+1-b}.
    """
    d = A.order // 2
    labels = path_labels(range(1, d + 1))
    if set(A.labels) != set(labels) or len(alpha) != d - 1:
        raise ValueError("tensor must live on the path with edges 1..d")
    I = {a} | {2 * k + alpha[k - 1] for k in range(1, d)} | {2 * d + b}
    J = {1 - a} | {2 * k + 1 - alpha[k - 1] for k in range(1, d)} | {2 * d + 1 - b}
    I = {labels[t - 1] for t in I if 1 <= t <= 2 * d}
    J = {labels[t - 1] for t in J if 1 <= t <= 2 * d}
    return RelValue(rank(flatten_mat(A, I, J)), A.n, d)


# --------------------------------------------------------------------------
# rho


def rho_from_decomposition(A: Tensor, G: PathGraph, decomposition: dict) -> Fraction:
    """Upper bound on rho(A) from explicit decompositions.

    ``decomposition`` maps alpha -> tensor (used for every gamma), or gamma ->
    {alpha -> tensor}.  Each decomposition must sum to A.
    """
    _check_labels(A, G)
    gammas = orientations(G.V1)
    if decomposition and all(isinstance(k, Orientation) and k.S == G.V1 and k.S != G.V2
                             for k in decomposition):
        per_gamma = decomposition
    else:
        per_gamma = {g: decomposition for g in gammas}
    best = Fraction(0)
    for g in gammas:
        dec = per_gamma[g]
        total = Tensor.zeros(A.n, A.labels, A.field)
        for X in dec.values():
            total = total + X
        if total != A:
            raise ValueError("decomposition does not sum to A")
        s = sum((relrk(X, G, al, g).value for al, X in dec.items()), Fraction(0))
        best = max(best, s)
    return best


@dataclass
class RhoResult:
    value: Fraction
    per_gamma: dict            # gamma bits -> minimal total rank
    exponent: int              # |E(G)|
    enumerated: int
    witnesses: dict            # gamma bits -> enumeration index of the first minimum


def _flatten_perm(labels, I):
    rows = [k for k, lab in enumerate(labels) if lab in I]
    cols = [k for k, lab in enumerate(labels) if lab not in I]
    return rows, cols


def rho_exact(A: Tensor, G: PathGraph, alphas=None, support=None, budget: int = DEFAULT_BUDGET,
              chunk: int = 1 << 16) -> RhoResult:
    """Exact rho by exhaustive enumeration of decompositions.

    Args:
        alphas: orientations of V2(G) allowed to carry parts (default all of them).
        support: boolean mask of tensor entries on which parts may be nonzero
            (default everything).  The last allowed alpha takes A minus the others.
        budget: limit on p^{(#alphas - 1) * #support}.
    """
    field = A.field
    if not isinstance(field, PrimeField):
        raise ValueError("rho_exact needs a finite prime field")
    _check_labels(A, G)
    A = A.reorder(G.D)
    p, n = field.p, A.n
    alphas = list(orientations(G.V2) if alphas is None else alphas)
    gammas = orientations(G.V1)
    shape = A.data.shape
    total_entries = A.data.size
    mask = np.ones(total_entries, dtype=bool) if support is None else np.asarray(support).reshape(-1)
    if (A.data.reshape(-1)[~mask] != 0).any():
        raise ValueError("A is not supported on the given support")
    positions = np.flatnonzero(mask)
    free = len(alphas) - 1
    width = free * len(positions)
    count = p**width
    if count > budget:
        raise BudgetExceeded(f"{count} decompositions exceed the budget {budget}")
    perms = {}
    for g in gammas:
        for t, al in enumerate(alphas):
            I, _ = _sides(G, al, g)
            rows, cols = _flatten_perm(G.D, I)
            perms[g.bits, t] = (rows, cols)
    target = A.data.reshape(-1).astype(np.int64)
    best = {g.bits: (None, None) for g in gammas}
    lead = 1

    for start in range(0, count, chunk):
        stop = min(start + chunk, count)
        B = stop - start
        codes = np.arange(start, stop, dtype=np.int64)
        digs = _digits(codes, p, width) if width else np.zeros((B, 0), dtype=np.int64)
        parts = np.zeros((B, len(alphas), total_entries), dtype=np.int64)
        for t in range(free):
            parts[:, t, positions] = digs[:, t * len(positions):(t + 1) * len(positions)]
        parts[:, -1, :] = (target[None] - parts[:, :-1, :].sum(axis=1)) % p
        parts = parts.reshape((B, len(alphas)) + shape)
        for g in gammas:
            tot = np.zeros(B, dtype=np.int64)
            for t in range(len(alphas)):
                rows, cols = perms[g.bits, t]
                X = parts[:, t].transpose([0] + [r + lead for r in rows] + [c + lead for c in cols])
                X = X.reshape(B, n ** len(rows), n ** len(cols))
                tot += batch_rank(X, field)
            i = int(np.argmin(tot))
            val = int(tot[i])
            cur = best[g.bits][0]
            if cur is None or val < cur:
                best[g.bits] = (val, start + i)
    per_gamma = {b: v for b, (v, _) in best.items()}
    E = len(G.edges)
    top = max(per_gamma.values())
    return RhoResult(Fraction(top, n**E), per_gamma, E, count,
                     {b: w for b, (_, w) in best.items()})


def padded_decomposition(cert) -> tuple[Tensor, PathGraph, dict]:
    """Decomposition of Padded(M) from a PT certificate: part N_kappa goes to the alpha flipping kappa."""
    M = cert.target
    d = M.d
    G = PathGraph(range(1, d + 2))
    A = padded_tensor(M)
    dec = {}
    for kappa, N in cert.parts.items():
        bits = sum(1 << (k - 1) for k in kappa)
        dec[Orientation(G.V2, bits)] = padded_tensor(N)
    if not dec:
        dec[Orientation(G.V2, 0)] = Tensor.zeros(A.n, A.labels, A.field)
    return A, G, dec


def rho_padded(A: Tensor, budget: int = DEFAULT_BUDGET) -> RhoResult:
    """rho of a tensor on the path with edges 1..d+1 supported on the p = q = first slice.

    Parts are restricted to the slice and to the alphas with kappa in [d-1]; by
    the argument in the module docs this does not change the minimum.
    """
    d = A.order // 2 - 1
    G = PathGraph(range(1, d + 2))
    A = A.reorder(G.D)
    support = np.zeros(A.data.shape, dtype=bool)
    support[(0,) + (slice(None),) * (2 * d) + (0,)] = True
    if A.field.nonzero_mask(A.data[~support]).any():
        raise ValueError("tensor is not supported on the padded slice")
    alphas = [Orientation(G.V2, sum(1 << (k - 1) for k in kappa)) for kappa in kappa_subsets(d)]
    return rho_exact(A, G, alphas=alphas, support=support, budget=budget)


def rho_pt_identity_check(M: HyperMatrix, restricted: bool = True,
                          budget: int = DEFAULT_BUDGET) -> dict:
    """Compare PT-rank(M) with n^{d+1} rho(Padded(M)).

    With ``restricted`` the rho search uses slice-supported parts and the alphas
    with kappa in [d-1] (see module docs); otherwise every alpha and every entry.
    """
    n, d = M.n, M.d
    pt, cert = pt_rank_exact(M, budget=budget)
    A = padded_tensor(M)
    G = PathGraph(range(1, d + 2))
    if restricted:
        res = rho_padded(A, budget=budget)
    else:
        res = rho_exact(A, G, budget=budget)
    scaled = res.value * n ** (d + 1)
    return {"pt_rank": pt, "rho": str(res.value), "scaled_rho": str(scaled),
            "equal": scaled == pt, "restricted": restricted, "enumerated": res.enumerated}


# --------------------------------------------------------------------------
# Lemma suite


def _rand_tensor(rng, G: PathGraph, n: int, field: Field, density: float | None = None) -> Tensor:
    data = field.random(rng, (n,) * len(G.D))
    if density is not None:
        data = data * (rng.random(data.shape) < density)
    return Tensor(n, G.D, data, field)


def _shift_graph(G: PathGraph, s: int) -> PathGraph:
    return PathGraph([e + s for e in G.edges])


def _relabel(A: Tensor, s: int) -> Tensor:
    return Tensor(A.n, [(u + s, v + s) for u, v in A.labels], A.data, A.field)


class _Tally:
    def __init__(self, name):
        self.name, self.trials, self.failures, self.witness = name, 0, 0, None
        self.observed = None

    def check(self, ok: bool, witness=None):
        self.trials += 1
        if not ok:
            self.failures += 1
            if self.witness is None:
                self.witness = witness

    def report(self):
        out = {"lemma": self.name, "trials": self.trials, "failures": self.failures,
               "witness": self.witness}
        if self.observed is not None:
            out["observed"] = self.observed
        return out


def _rho_single(A, G):
    return rho_exact(A, G).value


def lemma_suite(seed: int = 0, trials: int = 200, groups=None) -> list[dict]:
    """Randomized checks of the structural lemmas on tiny GF(2)/GF(3) instances.

    Returns one report per lemma: ``{"lemma", "trials", "failures", "witness"}``.
    ``deficit2-literal`` is observational: its ``failures`` count cases where the
    literal exponent is violated and it is never treated as a suite failure.
    """
    rng = np.random.default_rng(seed)
    F2, F3 = PrimeField(2), PrimeField(3)
    reports = []
    want = (lambda g: True) if groups is None else (lambda g: g in groups)

    # partial transpose algebra
    if want("transpose"):
        inv, comp, dual = _Tally("pt-involution"), _Tally("pt-composition"), _Tally("pt-duality")
        for t in range(trials):
            field = F2 if t % 2 else F3
            n, d = int(rng.integers(2, 4)), int(rng.integers(1, 4))
            if n**d > 27:
                n = 2
            M = HyperMatrix.from_array(n, d, field.random(rng, (n**d, n**d)), field)
            k1 = tuple(k for k in range(1, d + 1) if rng.random() < 0.5)
            k2 = tuple(k for k in range(1, d + 1) if rng.random() < 0.5)
            inv.check(partial_transpose(partial_transpose(M, k1), k1) == M, [n, d, k1])
            sym = tuple(sorted(set(k1) ^ set(k2)))
            comp.check(partial_transpose(partial_transpose(M, k1), k2) == partial_transpose(M, sym),
                       [n, d, k1, k2])
            cbar = tuple(k for k in range(1, d + 1) if k not in k1)
            full = partial_transpose(M, k1).body.T
            dual.check(full == partial_transpose(M, cbar).body, [n, d, k1])
        reports += [inv.report(), comp.report(), dual.report()]

    # oracle properties and invariance under the Kronecker action
    if want("invariance"):
        inv = _Tally("invariance")
        props = _Tally("pt-oracle-properties")
        for t in range(trials):
            field = F2 if t % 2 == 0 else F3
            method = "exhaustive" if field.p == 2 else "table"
            # sparse-ish matrices spread the values over 0..4
            dens = rng.choice([0.1, 0.25, 0.5, 1.0])
            data = field.random(rng, (4, 4)) * (rng.random((4, 4)) < dens)
            M = HyperMatrix.from_array(2, 2, data, field)
            Bs = [random_nonsingular(2, field, rng) for _ in range(2)]
            PM, _ = kron_act(M, Bs)
            v, _ = pt_rank_exact(M, method=method)
            w, _ = pt_rank_exact(PM, method=method)
            inv.check(v == w, {"field": field.p, "M": data.tolist(), "values": [v, w]})
            basic, _ = is_pt_basic(M)
            zero = M.body.is_zero()
            props.check(v <= rank(M.body) and (v == 0) == zero and (v == 1) == basic,
                        {"M": data.tolist(), "value": v})
        reports += [inv.report(), props.report()]

    # normal form of decompositions
    if want("decomp1"):
        nf = _Tally("decomp1-normal-form")
        # d = 1: allowing kappa in [d] does not lower the minimum (exhaustive)
        for code in range(16):
            M = HyperMatrix.from_array(2, 1, _digits(np.array([code]), 2, 4)[0], F2)
            best_full = min(
                rank(HyperMatrix.from_array(2, 1, _digits(np.array([c]), 2, 4)[0], F2).body)
                + rank((M - HyperMatrix.from_array(2, 1, _digits(np.array([c]), 2, 4)[0], F2)).body.T)
                for c in range(16))
            nf.check(best_full == pt_rank_exact(M)[0] == rank(M.body), {"M": code})
        for t in range(max(trials - 16, 0)):
            field = F2 if t % 2 else F3
            n, d = 2, int(rng.integers(2, 4))
            parts = {}
            M = HyperMatrix.zeros(n, d, field)
            for kappa in kappa_subsets(d, full=True):
                if rng.random() < 0.5:
                    N = HyperMatrix.from_array(n, d, field.random(rng, (n**d, n**d)), field)
                    parts[kappa] = N
                    M = M + N
            raw = sum(rank(partial_transpose(N, k).body) for k, N in parts.items())
            cert = make_certificate(M, parts)
            ok = verify_pt_certificate(cert) == cert.value <= raw
            ok = ok and all(d not in k for k in cert.parts)
            # a single move to the complement never changes the part's rank
            for k, N in parts.items():
                kb = canonical_kappa(k, d)
                ok = ok and rank(partial_transpose(N, k).body) == rank(partial_transpose(N, kb).body)
            nf.check(ok, {"d": d, "keys": [list(k) for k in parts]})
        reports.append(nf.report())

    # relative rank lemmas
    if want("relrk"):
        sub = _Tally("relrk-subadd")
        mult = _Tally("relrk-mult")
        mult2 = _Tally("relrk-mult2")
        dim = _Tally("dimension-bound")
        deficit = _Tally("deficit")
        literal = _Tally("deficit2-literal")
        same = _Tally("relrk-path-agreement")
        graphs = [PathGraph([1]), PathGraph([1, 3]), PathGraph([1, 2]), PathGraph([1, 2, 3]),
                  PathGraph([1, 2, 4])]
        lit_hold = 0
        for t in range(trials):
            field = F2 if t % 2 else F3
            n = 2
            G = graphs[t % len(graphs)]
            A1 = _rand_tensor(rng, G, n, field)
            A2 = _rand_tensor(rng, G, n, field, density=0.3)
            al = Orientation(G.V2, int(rng.integers(2 ** len(G.V2))))
            ga = Orientation(G.V1, int(rng.integers(2 ** len(G.V1))))
            r12 = relrk(A1 + A2, G, al, ga)
            r1, r2 = relrk(A1, G, al, ga), relrk(A2, G, al, ga)
            sub.check(r12.value <= r1.value + r2.value, {"G": G.edges})
            e = dimension_exponent(G, al, ga)
            for r in (r1, r2, r12):
                dim.check(r.value <= Fraction(n) ** e, {"G": G.edges})
            D1 = set(G.D1)
            gap = abs(len(set(ga.I) & D1) - len(set(ga.J) & D1))
            ok_lit = r1.value <= Fraction(1, n**gap)
            literal.check(ok_lit, {"G": G.edges, "gamma": ga.bits, "relrk": str(r1.value)})
            lit_hold += ok_lit

            # path version agrees with the graph version
            d = 1 + t % 3
            P = PathGraph(range(1, d + 1))
            AP = _rand_tensor(rng, P, n, field)
            alP = Orientation(P.V2, int(rng.integers(2 ** len(P.V2))))
            gaP = Orientation(P.V1, int(rng.integers(2 ** len(P.V1))))
            a, b = gaP.bit(0), gaP.bit(d)
            rp = relrk_path(AP, a, tuple(alP.bit(v) for v in range(1, d)), b)
            same.check(rp.value == relrk(AP, P, alP, gaP).value, {"d": d})
            deficit.check(rp.value <= Fraction(1, n ** int(a != b)), {"d": d, "a": a, "b": b})

            # multiplicativity on paths: A on v_0..v_d, B on v_d..v_{d+e}
            d, e_ = int(rng.integers(1, 3)), int(rng.integers(1, 3))
            GA, GB = PathGraph(range(1, d + 1)), PathGraph(range(d + 1, d + e_ + 1))
            A = _rand_tensor(rng, GA, n, field)
            B = _rand_tensor(rng, GB, n, field)
            AB = tensor_product(A, B)
            a, b, c = (int(x) for x in rng.integers(0, 2, size=3))
            alpha = tuple(int(x) for x in rng.integers(0, 2, size=d - 1))
            beta = tuple(int(x) for x in rng.integers(0, 2, size=e_ - 1))
            lhs = relrk_path(AB.reorder(path_labels(range(1, d + e_ + 1))), a, alpha + (b,) + beta, c)
            rhs = relrk_path(A, a, alpha, b).value * relrk_path(
                _relabel(B, -d).reorder(path_labels(range(1, e_ + 1))), b, beta, c).value
            mult.check(lhs.value == rhs, {"d": d, "e": e_})

            # graph version with shared or disjoint boundary vertices
            H_choices = [(PathGraph([1]), PathGraph([2])), (PathGraph([1]), PathGraph([3])),
                         (PathGraph([1, 2]), PathGraph([3])), (PathGraph([1]), PathGraph([2, 3]))]
            G1, H1 = H_choices[t % len(H_choices)]
            A = _rand_tensor(rng, G1, n, field)
            B = _rand_tensor(rng, H1, n, field)
            U = G1.union(H1)
            AB = tensor_product(A, B)
            shared = tuple(sorted(set(G1.V1) & set(H1.V1)))
            xi = Orientation(tuple(v for v in G1.V1 if v not in shared),
                             int(rng.integers(2 ** (len(G1.V1) - len(shared)))))
            zeta = Orientation(tuple(v for v in H1.V1 if v not in shared),
                               int(rng.integers(2 ** (len(H1.V1) - len(shared)))))
            delta = Orientation(shared, int(rng.integers(2 ** len(shared))))
            alpha = Orientation(G1.V2, int(rng.integers(2 ** len(G1.V2))))
            beta = Orientation(H1.V2, int(rng.integers(2 ** len(H1.V2))))
            big_alpha = (alpha | beta) | delta
            lhs = relrk(AB, U, big_alpha, xi | zeta)
            rhs = relrk(A, G1, alpha, xi | delta).value * relrk(B, H1, beta, zeta | delta).value
            mult2.check(lhs.value == rhs, {"G": G1.edges, "H": H1.edges})
        literal.observed = {"held": lit_hold, "violated": trials - lit_hold}
        reports += [sub.report(), mult.report(), mult2.report(), dim.report(), deficit.report(),
                    same.report(), literal.report()]

    # rho lemmas
    if want("rho"):
        sub = _Tally("rho-subadd")
        shrink = _Tally("rho-tensor")
        upper = _Tally("rho-decomposition-upper")
        for t in range(trials):
            kind = t % 4
            if kind in (0, 1):
                field = F3 if kind == 0 else F2
                G = PathGraph([1])
            elif kind == 2:
                field, G = F2, PathGraph([1, 3])
            else:
                field, G = F2, PathGraph([1, 2])
            n = 2
            A1 = _rand_tensor(rng, G, n, field)
            A2 = _rand_tensor(rng, G, n, field, density=0.4)
            if t % 10 == 0:
                A2 = -A1
            r1, r2 = rho_exact(A1, G).value, rho_exact(A2, G).value
            r12 = rho_exact(A1 + A2, G).value
            sub.check(r12 <= r1 + r2, {"G": G.edges})
            trivial = {Orientation(G.V2, 0): A1}
            for al in orientations(G.V2)[1:]:
                trivial[al] = Tensor.zeros(n, G.D, field)
            upper.check(rho_from_decomposition(A1, G, trivial) >= r1, {"G": G.edges})

            # tensor shrink on single edges, shared or disjoint vertex
            field = F2 if t % 3 else F3
            G1 = PathGraph([1])
            H1 = PathGraph([2]) if t % 2 == 0 or field.p == 3 else PathGraph([3])
            if field.p == 3 and H1.edges == (2,):
                # rho on a length-2 path over GF(3) is beyond the budget; use GF(2)
                field = F2
            A = _rand_tensor(rng, G1, n, field)
            B = _rand_tensor(rng, H1, n, field)
            U = G1.union(H1)
            AB = tensor_product(A, B)
            shared = len(set(G1.V1) & set(H1.V1))
            lhs = rho_exact(AB, U).value
            rhs = Fraction(1, n**shared) * min(rho_exact(A, G1).value, rho_exact(B, H1).value)
            shrink.check(lhs <= rhs, {"G": G1.edges, "H": H1.edges, "lhs": str(lhs), "rhs": str(rhs)})
        reports += [sub.report(), shrink.report(), upper.report()]
    return reports
