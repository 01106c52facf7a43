"""Align two reconstructed label spaces.

Canonical labels depend on vertex ids, so two reconstructions of
equivalent codes label their weight-6 sets W1, W2 differently.  The
blocks (4-sets covered by no word) make the label space an affine space
AG(d, 2); an aligning map must preserve blocks and hence is affine.  We
search affine maps x -> A x + c with A(W1) + c = W2:

* the origin goes to some point q0 (tried in order; the automorphism
  group is point-transitive, so the first q0 succeeds for equivalent
  inputs),
* three further points of a word through the origin go to any three
  points (these four are never a block),
* whenever a non-block quad is mapped, the unique word covering it must
  go to the unique word covering its image: its two remaining points
  map onto the two remaining target points, one of two ways,
* the affine span of the mapped points is closed linearly, and every
  word lying inside the span must land in W2.

Word counts per flat are constant for these designs, so no cheap
invariant prunes earlier; the cover rule is what keeps the tree small.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .code import popcount, supports_matrix
from .errors import StructuralError


class AffineError(StructuralError):
    pass


def fourth_points(words: np.ndarray, n: int) -> dict[tuple[int, int, int], int]:
    """X(t) for every triple t: the one point no word through t covers."""
    sup = supports_matrix(words)
    combos = np.array(list(combinations(range(sup.shape[1]), 3)))
    tri = sup[:, combos].reshape(-1, 3)
    key = (tri[:, 0] * n + tri[:, 1]) * n + tri[:, 2]
    masks = np.repeat(words, len(combos))
    order = np.argsort(key, kind="stable")
    key, masks = key[order], masks[order]
    starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    cover = np.bitwise_or.reduceat(masks, starts)
    keys = key[starts]
    if len(keys) != n * (n - 1) * (n - 2) // 6:
        raise AffineError("some triple lies in no word")
    full = np.uint64((1 << n) - 1) if n < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
    rest = full & ~cover
    if np.any(popcount(rest) != 1):
        raise AffineError("a triple does not have a unique fourth point")
    x = np.log2(rest.astype(np.float64)).astype(np.int64)
    i, j, k = keys // (n * n), (keys // n) % n, keys % n
    return {(int(a), int(b), int(c)): int(d) for a, b, c, d in zip(i, j, k, x)}


def affine_coordinates(words: np.ndarray, n: int) -> np.ndarray:
    """vec[label] in GF(2)^d with blocks = 4-sets of zero sum, label 0 at the origin."""
    X = fourth_points(words, n)

    def add(x, y):
        if x == y:
            return 0
        if x == 0:
            return y
        if y == 0:
            return x
        return X[tuple(sorted((0, x, y)))]

    vec = np.full(n, -1, dtype=np.int64)
    vec[0] = 0
    span = [0]
    k = 0
    for x in range(1, n):
        if vec[x] >= 0:
            continue
        new = []
        for s in span:
            p = add(s, x)
            if vec[p] >= 0:
                raise AffineError("fourth-point map is not an affine structure")
            vec[p] = vec[s] | (1 << k)
            new.append(p)
        span += new
        k += 1
    if (1 << k) != n:
        raise AffineError("label space is not an affine space")
    # every triple: X(a,b,c) has vector a+b+c
    t = np.array(list(X.keys()), dtype=np.int64)
    x = np.array(list(X.values()), dtype=np.int64)
    if not np.array_equal(vec[t[:, 0]] ^ vec[t[:, 1]] ^ vec[t[:, 2]], vec[x]):
        raise AffineError("blocks are not the planes of the derived affine structure")
    return vec


def _move(masks: np.ndarray, table: np.ndarray) -> np.ndarray:
    out = np.zeros_like(masks)
    one = np.uint64(1)
    for i, j in enumerate(table):
        out |= ((masks >> np.uint64(i)) & one) << np.uint64(int(j))
    return out


class _Space:
    """Word set in vector coordinates, with quad -> covering word lookup."""

    def __init__(self, W: np.ndarray, d: int):
        self.d = d
        self.W = np.asarray(W, dtype=np.uint64)
        self.sorted = np.sort(self.W)
        self.sup = supports_matrix(self.W)
        self.cover: dict[int, int] = {}
        for w, row in zip(self.W.tolist(), self.sup.tolist()):
            for q in combinations(row, 4):
                self.cover[(1 << q[0]) | (1 << q[1]) | (1 << q[2]) | (1 << q[3])] = w


class _Partial:
    __slots__ = ("f", "finv", "span", "span_mask", "q0")

    def __init__(self, n: int, q0: int):
        self.f = [-1] * n
        self.finv = [-1] * n
        self.f[0] = q0
        self.finv[q0] = 0
        self.span = [0]
        self.span_mask = 1
        self.q0 = q0

    def copy(self) -> "_Partial":
        p = _Partial.__new__(_Partial)
        p.f, p.finv, p.span = self.f[:], self.finv[:], self.span[:]
        p.span_mask, p.q0 = self.span_mask, self.q0
        return p

    def add(self, x: int, y: int) -> bool:
        """Map x -> y and close the span; False on conflict."""
        if self.f[x] >= 0:
            return self.f[x] == y
        if self.finv[y] >= 0:
            return False
        dd = y ^ self.q0
        new = []
        for s in self.span:
            t = self.f[s] ^ dd
            if self.finv[t] >= 0:
                return False
            self.f[s ^ x] = t
            self.finv[t] = s ^ x
            new.append(s ^ x)
        self.span += new
        for v in new:
            self.span_mask |= 1 << v
        return True


def _words_ok(S1: _Space, S2: _Space, part: _Partial, old_mask: int) -> bool:
    """Every word inside the span (and not inside the old span) maps into W2."""
    m = np.uint64(part.span_mask)
    inside = (S1.W & ~m) == 0
    if old_mask:
        inside &= (S1.W & ~np.uint64(old_mask)) != 0
    if not inside.any():
        return True
    sup = S1.sup[inside]
    f = np.array(part.f, dtype=np.int64)
    img = f[sup]
    masks = np.bitwise_or.reduce(np.uint64(1) << img.astype(np.uint64), axis=1)
    return bool(np.isin(masks, S2.sorted, assume_unique=False).all())


def _extend(S1: _Space, S2: _Space, part: _Partial, budget: list) -> _Partial | None:
    n = 1 << S1.d
    if len(part.span) == n:
        return part
    budget[0] -= 1
    if budget[0] < 0:
        return None
    # a mapped non-block quad whose cover word leaves the span
    span = part.span
    a, b = span[0], span[1]
    for i in range(2, len(span)):
        c = span[i]
        for j in range(i + 1, len(span)):
            x = span[j]
            if a ^ b ^ c ^ x == 0:
                continue
            q = (1 << a) | (1 << b) | (1 << c) | (1 << x)
            w = S1.cover[q]
            if w & ~part.span_mask == 0:
                continue
            y1, y2 = [v for v in range(n) if (w & ~q) >> v & 1]
            fq = (1 << part.f[a]) | (1 << part.f[b]) | (1 << part.f[c]) | (1 << part.f[x])
            w2 = S2.cover.get(fq)
            if w2 is None:
                return None
            z1, z2 = [v for v in range(n) if (w2 & ~fq) >> v & 1]
            for u1, u2 in ((z1, z2), (z2, z1)):
                nxt = part.copy()
                if nxt.add(y1, u1) and nxt.add(y2, u2) and _words_ok(S1, S2, nxt, part.span_mask):
                    done = _extend(S1, S2, nxt, budget)
                    if done is not None:
                        return done
            return None
    return None  # span closed under covers but not full: cannot happen for affine inputs


def find_affine_map(W1: np.ndarray, W2: np.ndarray, d: int, budget: int = 200000, seed: int = 0) -> np.ndarray | None:
    """table with table[x] = image of vector x, mapping word set W1 onto W2
    (both in vector coordinates); None if no such affine map exists or the
    search budget runs out."""
    n = 1 << d
    if len(W1) != len(W2):
        return None
    S1, S2 = _Space(W1, d), _Space(W2, d)
    w0 = next(r for r in S1.sup.tolist() if 0 in r)
    p1, p2, p3 = [v for v in w0 if v != 0][:3]
    left = [budget]
    rng = np.random.default_rng(seed)
    for q0 in range(n):
        # all ordered triples of other points; valid ones cluster under the
        # lexicographic order, so they are visited in a seeded random order
        q = np.array([v for v in range(n) if v != q0])
        t = np.array(np.meshgrid(q, q, q, indexing="ij")).reshape(3, -1).T
        t = t[(t[:, 0] != t[:, 1]) & (t[:, 0] != t[:, 2]) & (t[:, 1] != t[:, 2])
              & ((q0 ^ t[:, 0] ^ t[:, 1] ^ t[:, 2]) != 0)]
        for q1, q2, q3 in t[rng.permutation(len(t))].tolist():
            part = _Partial(n, q0)
            if not (part.add(p1, q1) and part.add(p2, q2) and part.add(p3, q3)):
                continue
            done = _extend(S1, S2, part, left)
            if done is not None:
                return np.array(done.f, dtype=np.int64)
            if left[0] < 0:
                return None
    return None


def align_words(W1: np.ndarray, W2: np.ndarray, n: int, budget: int = 200000) -> np.ndarray | None:
    """0-based label map rho with rho(W1) = W2 for label-space word sets."""
    d = n.bit_length() - 1
    v1 = affine_coordinates(W1, n)
    v2 = affine_coordinates(W2, n)
    inv2 = np.empty(n, dtype=np.int64)
    inv2[v2] = np.arange(n)
    table = find_affine_map(_move(W1, v1), _move(W2, v2), d, budget)
    if table is None:
        return None
    rho = inv2[table[v1]]
    if not np.array_equal(np.sort(_move(W1, rho)), np.sort(W2)):
        return None
    return rho
