"""Slow, independent reference implementations used as test oracles.

Nothing here imports the package's algorithms; everything is written with plain
loops over index tuples so it can be compared against the vectorised code.
"""

import itertools
from fractions import Fraction


def rank_mod_p(rows, p):
    """Rank of a list-of-lists matrix over GF(p) by textbook elimination."""
    m = [[int(x) % p for x in r] for r in rows]
    if not m or not m[0]:
        return 0
    r, cols = 0, len(m[0])
    for c in range(cols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], p - 2, p)
        m[r] = [x * inv % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        r += 1
    return r


def rank_rational(rows):
    m = [[Fraction(x) for x in r] for r in rows]
    if not m or not m[0]:
        return 0
    r = 0
    for c in range(len(m[0])):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
    return r


def tuples(n, d):
    return list(itertools.product(range(n), repeat=d))


def index(t, n):
    v = 0
    for x in t:
        v = v * n + x
    return v


def partial_transpose(M, n, d, kappa):
    """Swap i_k and j_k for k in kappa (1-based) on a list-of-lists matrix."""
    size = n**d
    out = [[0] * size for _ in range(size)]
    for i in tuples(n, d):
        for j in tuples(n, d):
            a, b = list(i), list(j)
            for k in kappa:
                a[k - 1], b[k - 1] = b[k - 1], a[k - 1]
            out[index(a, n)][index(b, n)] = M[index(i, n)][index(j, n)]
    return out


def pt_rank_brute(M, n, d, p):
    """min over N_kappa (kappa in [d-1]) of sum rank(N_kappa^{T kappa}); tiny cases only."""
    kappas = [k for r in range(d) for k in itertools.combinations(range(1, d), r)]
    size = n**d
    cells = size * size
    flat = [x % p for row in M for x in row]
    best = None
    free = kappas[:-1]
    for choice in itertools.product(range(p), repeat=cells * len(free)):
        parts, acc = [], [0] * cells
        for t in range(len(free)):
            block = list(choice[t * cells:(t + 1) * cells])
            parts.append(block)
            acc = [a + b for a, b in zip(acc, block)]
        parts.append([(f - a) % p for f, a in zip(flat, acc)])
        total = 0
        for kap, block in zip(kappas, parts):
            mat = [block[r * size:(r + 1) * size] for r in range(size)]
            total += rank_mod_p(partial_transpose(mat, n, d, kap), p)
            if best is not None and total >= best:
                break
        if best is None or total < best:
            best = total
    return best


def gf2_rank_bits(rows):
    """Rank over GF(2) of rows given as int bitmasks."""
    basis = []
    for v in rows:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


def multiquadratic_coeffs(M, n, d, p=None):
    """Expand Q_M = sum M_{(i),(j)} prod_k x^k_{i_k} x^k_{j_k} monomial by monomial."""
    out = {}
    for i in tuples(n, d):
        for j in tuples(n, d):
            v = M[index(i, n)][index(j, n)]
            if v == 0:
                continue
            key = tuple(tuple(sorted((a, b))) for a, b in zip(i, j))
            out[key] = out.get(key, 0) + v
    if p is not None:
        out = {k: v % p for k, v in out.items()}
    return {k: v for k, v in out.items() if v != 0}


def square_sum_coeffs(terms, n, d, p=None):
    """Coefficients of sum_r g_r^2 for multilinear forms g_r given as dicts tuple -> coeff."""
    out = {}
    for g in terms:
        for i, a in g.items():
            for j, b in g.items():
                key = tuple(tuple(sorted((x, y))) for x, y in zip(i, j))
                out[key] = out.get(key, 0) + a * b
    if p is not None:
        out = {k: v % p for k, v in out.items()}
    return {k: v for k, v in out.items() if v != 0}


def abp_entry(layers, v1, v2, xs, p):
    """v1^T L_1[:, :, x_1] ... L_k[:, :, x_k] v2 mod p by explicit matrix products."""
    vec = [int(a) for a in v1]
    for L, x in zip(layers, xs):
        w_out = len(L[0])
        vec = [sum(vec[a] * int(L[a][b][x]) for a in range(len(vec))) % p for b in range(w_out)]
    return sum(a * int(b) for a, b in zip(vec, v2)) % p
