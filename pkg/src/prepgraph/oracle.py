"""Slow, independent baselines.

Nothing here imports the optimized paths (no field tables, no key-XOR
tables, no kernels): field multiplication is shift-and-add, membership is
evaluated straight from the defining conditions, cliques come from a plain
pivoting recursion.  Tests compare the main modules against these.

Every function refuses inputs above a hard size cap instead of running
for hours.
"""

from __future__ import annotations

import random
from collections import Counter
from itertools import combinations

import numpy as np

from .code import CodeParams, Word

MAX_CLIQUE_VERTICES = 500
MAX_EXHAUSTIVE_N = 16


class OracleLimit(ValueError):
    """Input too large for a brute-force oracle."""


# --- arithmetic -----------------------------------------------------------------


def naive_mul(a: int, b: int, poly: int, t: int) -> int:
    """Shift-and-add multiplication in GF(2)[x]/(poly)."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> t & 1:
            a ^= poly
    return r


def _halves(mask: int, q: int) -> tuple[list[int], list[int]]:
    X = [i for i in range(q) if mask >> i & 1]
    Y = [i for i in range(q) if mask >> (q + i) & 1]
    return X, Y


def _xor(vals) -> int:
    s = 0
    for v in vals:
        s ^= v
    return s


def naive_perfect(mask: int, t: int) -> bool:
    q = 1 << t
    X, Y = _halves(mask, q)
    return len(X) % 2 == 0 and len(Y) % 2 == 0 and _xor(X) == _xor(Y)


def naive_preparata(mask: int, t: int, poly: int) -> bool:
    if not naive_perfect(mask, t):
        return False
    q = 1 << t
    X, Y = _halves(mask, q)

    def cube(x):
        return naive_mul(naive_mul(x, x, poly, t), x, poly, t)

    sx = _xor(X)
    return _xor(cube(x) for x in X) ^ cube(sx) == _xor(cube(y) for y in Y)


def _check_small(params: CodeParams) -> None:
    if params.n > MAX_EXHAUSTIVE_N:
        raise OracleLimit(f"exhaustive oracle is limited to n <= {MAX_EXHAUSTIVE_N} (got n={params.n})")


def naive_codes(params: CodeParams) -> tuple[np.ndarray, np.ndarray]:
    """(P, C_P) as sorted mask arrays by filtering all 2^n words."""
    _check_small(params)
    P, C = [], []
    for w in range(1 << params.n):
        if naive_perfect(w, params.t):
            C.append(w)
            if naive_preparata(w, params.t, params.poly):
                P.append(w)
    return np.array(P, dtype=np.uint64), np.array(C, dtype=np.uint64)


def min_distance(masks: np.ndarray) -> int:
    d = np.bitwise_count(masks[:, None] ^ masks[None, :]).astype(np.int64)
    np.fill_diagonal(d, 10**6)
    return int(d.min())


def weight_distribution(masks: np.ndarray) -> dict[int, int]:
    return dict(sorted(Counter(int(w).bit_count() for w in masks.tolist()).items()))


# --- C = P u Z(P) (t = 3) ---------------------------------------------------------


def zp_mask_array(params: CodeParams) -> np.ndarray:
    """All words at distance >= 4 from every Preparata codeword."""
    P, _ = naive_codes(params)
    words = np.arange(1 << params.n, dtype=np.uint64)
    dmin = np.full(len(words), 10**6, dtype=np.int64)
    for c in P:
        np.minimum(dmin, np.bitwise_count(words ^ c).astype(np.int64), out=dmin)
    return words[dmin >= 4]


def zp_words(params: CodeParams) -> set[Word]:
    return {Word(int(w), params.n) for w in zp_mask_array(params)}


def theorem1_check(params: CodeParams) -> dict:
    """C = P ∪ Z(P) over all words, and every word of C is in P or at
    distance exactly 4 from P."""
    P, C = naive_codes(params)
    Z = zp_mask_array(params)
    union = np.union1d(P, Z)
    near = []
    for z in np.setdiff1d(C, P):
        near.append(int(np.bitwise_count(P ^ z).min()) == 4)
    return {
        "words_scanned": 1 << params.n,
        "P": len(P),
        "C": len(C),
        "Z": len(Z),
        "C_equals_P_union_Z": bool(np.array_equal(union, C)),
        "distance_exactly_4": bool(all(near)),
    }


# --- weight-4 words vs weight-6 supports ------------------------------------------------


def _quad_mask(quad) -> int:
    m = 0
    for x in quad:
        m |= 1 << x
    return m


def lemma1_check(params: CodeParams, w6: np.ndarray | None = None,
                 sample: int | None = None, seed: int = 0) -> dict:
    """Weight-4 words of C never sit inside a weight-6 Preparata support, and
    every 4-set is either such a word or inside exactly one weight-6 support.

    At n <= 16 everything is computed here; for larger n the weight-6 words
    must be supplied and the corollary is checked on ``sample`` random quads.
    """
    n, t = params.n, params.t
    if w6 is None:
        _check_small(params)
        P, _ = naive_codes(params)
        w6 = P[np.bitwise_count(P) == 6]
    w6 = [int(w) for w in np.asarray(w6, dtype=np.uint64).tolist()]
    covers: Counter = Counter()
    for w in w6:
        for quad in combinations([i for i in range(n) if w >> i & 1], 4):
            covers[_quad_mask(quad)] += 1
    # weight-4 words of C are exactly the 4-sets passing P1 + P2
    if n <= MAX_EXHAUSTIVE_N or sample is None:
        quads = list(combinations(range(n), 4))
    else:
        rnd = random.Random(seed)
        quads = [tuple(sorted(rnd.sample(range(n), 4))) for _ in range(sample)]
    blocks = [q for q in combinations(range(n), 4) if naive_perfect(_quad_mask(q), t)]
    inside = sum(covers[_quad_mask(b)] for b in blocks)
    bad = 0
    for quad in quads:
        m = _quad_mask(quad)
        expected = 0 if naive_perfect(m, t) else 1
        if covers[m] != expected:
            bad += 1
    return {"blocks": len(blocks), "block_in_w6": inside, "quads": len(quads), "dichotomy_violations": bad}


# --- designs ---------------------------------------------------------------------


def naive_design_check(blocks, n: int, t_param: int, k: int, lam: int) -> bool:
    """Every t-subset of range(n) lies in exactly lam blocks of size k."""
    if t_param > 4 or n > 128:
        raise OracleLimit("design check is limited to t <= 4, n <= 128")
    count: Counter = Counter()
    for b in blocks:
        b = tuple(sorted(int(x) for x in b))
        if len(b) != k or len(set(b)) != k or not all(0 <= x < n for x in b):
            return False
        for s in combinations(b, t_param):
            count[s] += 1
    return all(count[s] == lam for s in combinations(range(n), t_param))


# --- cliques ---------------------------------------------------------------------


def naive_maximal_cliques(g, vertices=None, cap: int = MAX_CLIQUE_VERTICES) -> list[list[int]]:
    """All maximal cliques of the subgraph induced on ``vertices`` (default:
    every vertex) by pivoting Bron-Kerbosch over Python int bitsets."""
    verts = list(range(g.n_vertices)) if vertices is None else sorted(int(v) for v in vertices)
    if len(verts) > cap:
        raise OracleLimit(f"naive clique enumeration is capped at {cap} vertices (got {len(verts)})")
    pos = {v: i for i, v in enumerate(verts)}
    adj = [0] * len(verts)
    for v, i in pos.items():
        for u in g.neighbors(v).tolist():
            j = pos.get(u)
            if j is not None:
                adj[i] |= 1 << j
    out: list[list[int]] = []

    def bits(x):
        while x:
            low = x & -x
            yield low.bit_length() - 1
            x ^= low

    def expand(R, P, X):
        if not P and not X:
            out.append(sorted(verts[i] for i in R))
            return
        pivot = max(bits(P | X), key=lambda u: (P & adj[u]).bit_count())
        for v in list(bits(P & ~adj[pivot])):
            expand(R + [v], P & adj[v], X & adj[v])
            P &= ~(1 << v)
            X |= 1 << v

    expand([], (1 << len(verts)) - 1, 0)
    return sorted(out)
