# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.  Signatures mirror prepgraph._pycore exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memset
from libc.stdint cimport uint64_t, int64_t, int32_t, uint8_t, int8_t

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil

cnp.import_array()

ctypedef uint64_t u64


# ---------------------------------------------------------------------------
# weight-6 scan
# ---------------------------------------------------------------------------

cdef struct U64Buf:
    u64 *data
    Py_ssize_t size
    Py_ssize_t cap


cdef inline int buf_push(U64Buf *b, u64 v) noexcept nogil:
    cdef u64 *nd
    if b.size == b.cap:
        b.cap = b.cap * 2 if b.cap else 4096
        nd = <u64 *> realloc(b.data, b.cap * sizeof(u64))
        if nd == NULL:
            return -1
        b.data = nd
    b.data[b.size] = v
    b.size += 1
    return 0


def scan_w6(const int64_t[::1] keys, const uint8_t[::1] valid, int64_t base_key,
            int lo, int hi):
    """Masks of all 6-subsets e with first index in [lo, hi) and
    valid[key(e) ^ base_key].  Output is in lexicographic support order."""
    cdef int n = keys.shape[0]
    cdef int i1, i2, i3, i4, i5, i6
    cdef int64_t k1, k2, k3, k4, k5
    cdef u64 m1, m2, m3, m4, m5
    cdef U64Buf buf
    cdef int err = 0
    buf.data = NULL
    buf.size = 0
    buf.cap = 0
    if hi > n - 5:
        hi = n - 5
    with nogil:
        for i1 in range(lo, hi):
            k1 = keys[i1] ^ base_key
            m1 = (<u64> 1) << i1
            for i2 in range(i1 + 1, n - 4):
                k2 = k1 ^ keys[i2]
                m2 = m1 | ((<u64> 1) << i2)
                for i3 in range(i2 + 1, n - 3):
                    k3 = k2 ^ keys[i3]
                    m3 = m2 | ((<u64> 1) << i3)
                    for i4 in range(i3 + 1, n - 2):
                        k4 = k3 ^ keys[i4]
                        m4 = m3 | ((<u64> 1) << i4)
                        for i5 in range(i4 + 1, n - 1):
                            k5 = k4 ^ keys[i5]
                            m5 = m4 | ((<u64> 1) << i5)
                            for i6 in range(i5 + 1, n):
                                if valid[k5 ^ keys[i6]]:
                                    if buf_push(&buf, m5 | ((<u64> 1) << i6)) < 0:
                                        err = 1
    if err:
        free(buf.data)
        raise MemoryError()
    out = np.empty(buf.size, dtype=np.uint64)
    cdef u64[::1] ov = out
    cdef Py_ssize_t j
    for j in range(buf.size):
        ov[j] = buf.data[j]
    free(buf.data)
    return out


# ---------------------------------------------------------------------------
# local bounded Bron-Kerbosch on small candidate sets
# ---------------------------------------------------------------------------

cdef inline int popc(u64 x) noexcept nogil:
    return __builtin_popcountll(x)


cdef struct BKCtx:
    int W            # words per bitset
    int nc           # candidates
    u64 *adj         # nc * W
    int threshold    # minimum |R| to report
    int found
    int found_size
    u64 *best        # W, first reported clique
    u64 *stack       # scratch, (nc + 2) * 3 * W
    int overflow


cdef int bs_count(const u64 *a, int W) noexcept nogil:
    cdef int s = 0, w
    for w in range(W):
        s += popc(a[w])
    return s


cdef void bk(BKCtx *ctx, int depth, int rsize) noexcept nogil:
    cdef int W = ctx.W
    cdef u64 *R = ctx.stack + (<Py_ssize_t> depth) * 3 * W
    cdef u64 *P = R + W
    cdef u64 *X = P + W
    cdef u64 *R2 = R + 3 * W
    cdef u64 *P2 = R2 + W
    cdef u64 *X2 = P2 + W
    cdef int w, psize, xs, best_cnt, cnt, pivot, v, b
    cdef u64 bits, cand_word
    psize = bs_count(P, W)
    if psize == 0:
        if bs_count(X, W) == 0 and rsize >= ctx.threshold:
            ctx.found += 1
            if ctx.found == 1:
                ctx.found_size = rsize
                for w in range(W):
                    ctx.best[w] = R[w]
        return
    if rsize + psize < ctx.threshold:
        return
    # pivot maximizing |P & N(pivot)| over P | X
    pivot = -1
    best_cnt = -1
    for w in range(W):
        bits = P[w] | X[w]
        while bits:
            b = __builtin_ctzll(bits)
            bits &= bits - 1
            v = w * 64 + b
            cnt = 0
            for xs in range(W):
                cnt += popc(P[xs] & ctx.adj[v * W + xs])
            if cnt > best_cnt:
                best_cnt = cnt
                pivot = v
    for w in range(W):
        cand_word = P[w] & ~ctx.adj[pivot * W + w]
        while cand_word:
            b = __builtin_ctzll(cand_word)
            cand_word &= cand_word - 1
            v = w * 64 + b
            for xs in range(W):
                R2[xs] = R[xs]
                P2[xs] = P[xs] & ctx.adj[v * W + xs]
                X2[xs] = X[xs] & ctx.adj[v * W + xs]
            R2[w] |= (<u64> 1) << b
            bk(ctx, depth + 1, rsize + 1)
            P[w] &= ~((<u64> 1) << b)
            X[w] |= (<u64> 1) << b
            if rsize + bs_count(P, W) < ctx.threshold:
                return


cdef Py_ssize_t find_slot(const int64_t *indptr, const int32_t *indices, int x, int y) noexcept nogil:
    cdef Py_ssize_t lo = indptr[x], hi = indptr[x + 1], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if indices[mid] < y:
            lo = mid + 1
        else:
            hi = mid
    if lo < indptr[x + 1] and indices[lo] == y:
        return lo
    return -1


def triple_cliques(const int64_t[::1] indptr, const int32_t[::1] indices, int exclude,
                   int min_size, int expected):
    """Edge-driven extraction of the large maximal cliques.

    For every edge (u, v) not yet covered (vertices != exclude), search the
    common neighbourhood for maximal cliques of size >= min_size - 2.
    Returns (members int32[k, expected], problems int64[p, 3]) where a
    problem row is (u, v, code): 0 no large clique, 1 several large cliques,
    2 wrong size, 3 edge already covered by an earlier clique.
    """
    cdef int nv = indptr.shape[0] - 1
    cdef Py_ssize_t ne = indices.shape[0]
    cdef uint8_t *covered = <uint8_t *> malloc(ne if ne > 0 else 1)
    cdef int32_t *pos = <int32_t *> malloc(sizeof(int32_t) * (nv if nv > 0 else 1))
    cdef int32_t *cand = <int32_t *> malloc(sizeof(int32_t) * (nv if nv > 0 else 1))
    cdef int32_t *clq = <int32_t *> malloc(sizeof(int32_t) * (nv + 2))
    cdef Py_ssize_t i, s, a, bnd, ea, eb, slot
    cdef int u, v, nc, x, y, w, W, k, j, bit
    cdef u64 bits
    cdef bint bad
    cdef BKCtx ctx
    cdef Py_ssize_t adj_cap = 0, stack_cap = 0, best_cap = 0
    cdef u64 *adjbuf = NULL
    cdef u64 *stackbuf = NULL
    cdef u64 *bestbuf = NULL
    members = []
    problems = []
    memset(covered, 0, ne if ne > 0 else 1)
    for i in range(nv):
        pos[i] = -1
    cdef const int64_t *ip = &indptr[0]
    cdef const int32_t *ix = &indices[0] if ne > 0 else NULL
    try:
        for u in range(nv):
            if u == exclude:
                continue
            for s in range(ip[u], ip[u + 1]):
                v = ix[s]
                if v <= u or v == exclude or covered[s]:
                    continue
                # common neighbourhood by merge
                nc = 0
                ea = ip[u]
                eb = ip[v]
                while ea < ip[u + 1] and eb < ip[v + 1]:
                    if ix[ea] < ix[eb]:
                        ea += 1
                    elif ix[ea] > ix[eb]:
                        eb += 1
                    else:
                        if ix[ea] != exclude:
                            cand[nc] = ix[ea]
                            nc += 1
                        ea += 1
                        eb += 1
                if nc < min_size - 2:
                    problems.append((u, v, 0))
                    continue
                W = (nc + 63) // 64
                if <Py_ssize_t> nc * W > adj_cap:
                    adj_cap = <Py_ssize_t> nc * W * 2
                    adjbuf = <u64 *> realloc(adjbuf, adj_cap * sizeof(u64))
                if W > best_cap:
                    best_cap = W
                    bestbuf = <u64 *> realloc(bestbuf, best_cap * sizeof(u64))
                if <Py_ssize_t> (nc + 2) * 3 * W > stack_cap:
                    stack_cap = <Py_ssize_t> (nc + 2) * 3 * W * 2
                    stackbuf = <u64 *> realloc(stackbuf, stack_cap * sizeof(u64))
                if adjbuf == NULL or stackbuf == NULL or bestbuf == NULL:
                    raise MemoryError()
                memset(adjbuf, 0, <Py_ssize_t> nc * W * sizeof(u64))
                for k in range(nc):
                    pos[cand[k]] = k
                for k in range(nc):
                    x = cand[k]
                    for a in range(ip[x], ip[x + 1]):
                        j = pos[ix[a]]
                        if j >= 0:
                            adjbuf[k * W + (j >> 6)] |= (<u64> 1) << (j & 63)
                for k in range(nc):
                    pos[cand[k]] = -1
                memset(stackbuf, 0, 3 * W * sizeof(u64))
                for k in range(nc):
                    stackbuf[W + (k >> 6)] |= (<u64> 1) << (k & 63)
                ctx.W = W
                ctx.nc = nc
                ctx.adj = adjbuf
                ctx.threshold = min_size - 2
                ctx.found = 0
                ctx.found_size = 0
                ctx.best = bestbuf
                ctx.stack = stackbuf
                with nogil:
                    bk(&ctx, 0, 0)
                if ctx.found == 0:
                    problems.append((u, v, 0))
                    continue
                if ctx.found > 1:
                    problems.append((u, v, 1))
                    continue
                if ctx.found_size + 2 != expected:
                    problems.append((u, v, 2))
                    continue
                k = 0
                clq[k] = u
                k += 1
                clq[k] = v
                k += 1
                for w in range(W):
                    bits = bestbuf[w]
                    while bits:
                        bit = __builtin_ctzll(bits)
                        bits &= bits - 1
                        clq[k] = cand[w * 64 + bit]
                        k += 1
                bad = False
                for a in range(k):
                    for bnd in range(k):
                        if a == bnd:
                            continue
                        slot = find_slot(ip, ix, clq[a], clq[bnd])
                        if slot < 0:
                            bad = True
                        elif covered[slot]:
                            bad = True
                        else:
                            covered[slot] = 1
                if bad:
                    problems.append((u, v, 3))
                    continue
                members.append(sorted([clq[a] for a in range(k)]))
    finally:
        free(covered)
        free(pos)
        free(cand)
        free(clq)
        free(adjbuf)
        free(stackbuf)
        free(bestbuf)
    if members:
        mem = np.asarray(members, dtype=np.int32)
    else:
        mem = np.zeros((0, expected), dtype=np.int32)
    prob = np.asarray(problems, dtype=np.int64).reshape(-1, 3)
    return mem, prob


# ---------------------------------------------------------------------------
# shared-vertex clique pair profiles
# ---------------------------------------------------------------------------

def shared_vertex_profiles(const int64_t[::1] indptr, const int32_t[::1] indices,
                           const int32_t[:, ::1] vertex_cliques,
                           const int32_t[:, ::1] clique_members, int exclude):
    """For every vertex u and every pair of cliques through u, classify the
    cross-neighbour pattern (shared vertex u excluded on both sides).

    Returns (pairs int32[p, 2], kind int8[p]) with kind 1 when each side has
    exactly one member with 2 cross-neighbours and all others 3 (the
    shared-vertex-pair pattern), else 0.  Pairs are (lower id, higher id).
    """
    cdef int nv = indptr.shape[0] - 1
    cdef int d = vertex_cliques.shape[1]
    cdef int s = clique_members.shape[1]
    cdef int32_t *tag = <int32_t *> malloc(sizeof(int32_t) * nv)
    cdef int32_t *row = <int32_t *> malloc(sizeof(int32_t) * nv)
    cdef int32_t *R = <int32_t *> malloc(sizeof(int32_t) * d * s * d)
    cdef int32_t *rows_of = <int32_t *> malloc(sizeof(int32_t) * d * s)
    cdef int u, i, j, x, y, c, ci, cj, nrow, n2, n3, nother, r, side_ok
    cdef Py_ssize_t a
    cdef Py_ssize_t npairs = 0
    cdef Py_ssize_t total = <Py_ssize_t> nv * d * (d - 1) // 2
    out_pairs = np.empty((total, 2), dtype=np.int32)
    out_kind = np.zeros(total, dtype=np.int8)
    cdef int32_t[:, ::1] op = out_pairs
    cdef int8_t[::1] ok = out_kind
    cdef int nslot[64]
    if d > 64:
        raise ValueError("too many cliques per vertex")
    for i in range(nv):
        tag[i] = -1
    try:
        with nogil:
            for u in range(nv):
                if u == exclude:
                    continue
                nrow = 0
                for i in range(d):
                    c = vertex_cliques[u, i]
                    nslot[i] = 0
                    for j in range(s):
                        x = clique_members[c, j]
                        if x != u:
                            tag[x] = i
                            row[x] = nrow
                            rows_of[i * s + nslot[i]] = x
                            nslot[i] += 1
                            nrow += 1
                memset(R, 0, sizeof(int32_t) * nrow * d)
                for i in range(d):
                    for j in range(nslot[i]):
                        x = rows_of[i * s + j]
                        for a in range(indptr[x], indptr[x + 1]):
                            y = indices[a]
                            if y != u and tag[y] >= 0:
                                R[row[x] * d + tag[y]] += 1
                for ci in range(d):
                    for cj in range(ci + 1, d):
                        side_ok = 1
                        for r in range(2):
                            if r == 0:
                                i = ci
                                j = cj
                            else:
                                i = cj
                                j = ci
                            n2 = 0
                            n3 = 0
                            nother = 0
                            for x in range(nslot[i]):
                                y = R[row[rows_of[i * s + x]] * d + j]
                                if y == 2:
                                    n2 += 1
                                elif y == 3:
                                    n3 += 1
                                else:
                                    nother += 1
                            if not (n2 == 1 and nother == 0):
                                side_ok = 0
                        x = vertex_cliques[u, ci]
                        y = vertex_cliques[u, cj]
                        if x < y:
                            op[npairs, 0] = x
                            op[npairs, 1] = y
                        else:
                            op[npairs, 0] = y
                            op[npairs, 1] = x
                        ok[npairs] = side_ok
                        npairs += 1
                for i in range(d):
                    for j in range(nslot[i]):
                        tag[rows_of[i * s + j]] = -1
    finally:
        free(tag)
        free(row)
        free(R)
        free(rows_of)
    return out_pairs[:npairs], out_kind[:npairs]


def cross_counts(const int64_t[::1] indptr, const int32_t[::1] indices,
                 const int32_t[:, ::1] A, const int32_t[:, ::1] B):
    """out[p, i] = number of neighbours of A[p, i] that lie in row B[p]."""
    cdef int nv = indptr.shape[0] - 1
    cdef Py_ssize_t np_ = A.shape[0], p, a
    cdef int sa = A.shape[1], sb = B.shape[1], i, x
    cdef int32_t cnt
    out = np.zeros((np_, sa), dtype=np.int32)
    cdef int32_t[:, ::1] ov = out
    cdef int64_t *stamp = <int64_t *> malloc(sizeof(int64_t) * (nv if nv > 0 else 1))
    for x in range(nv):
        stamp[x] = -1
    try:
        with nogil:
            for p in range(np_):
                for i in range(sb):
                    stamp[B[p, i]] = p
                for i in range(sa):
                    x = A[p, i]
                    cnt = 0
                    for a in range(indptr[x], indptr[x + 1]):
                        if stamp[indices[a]] == p:
                            cnt += 1
                    ov[p, i] = cnt
    finally:
        free(stamp)
    return out
