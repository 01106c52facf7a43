"""Pure-Python/numpy kernels; behaviour and output order match ``_core``."""

from __future__ import annotations

from itertools import combinations

import numpy as np


def _triples(n: int):
    tri = np.array(list(combinations(range(n), 3)), dtype=np.int64).reshape(-1, 3)
    one = np.uint64(1)
    masks = (one << tri[:, 0].astype(np.uint64)) | (one << tri[:, 1].astype(np.uint64)) | (
        one << tri[:, 2].astype(np.uint64)
    )
    # index of the first triple whose smallest element is >= f
    start = np.searchsorted(tri[:, 0], np.arange(n + 1), side="left")
    return tri, masks, start


def scan_w6(keys, valid, base_key, lo, hi):
    keys = np.asarray(keys, dtype=np.int64)
    valid = np.asarray(valid, dtype=np.uint8)
    n = len(keys)
    tri, tmask, start = _triples(n)
    tkey = keys[tri[:, 0]] ^ keys[tri[:, 1]] ^ keys[tri[:, 2]]
    out = []
    first = np.nonzero((tri[:, 0] >= lo) & (tri[:, 0] < hi))[0]
    for f in first:
        c = tri[f, 2]
        s = start[c + 1]
        if s >= len(tri):
            continue
        hits = np.nonzero(valid[tkey[s:] ^ (tkey[f] ^ base_key)])[0]
        if len(hits):
            out.append(tmask[s + hits] | tmask[f])
    if not out:
        return np.zeros(0, dtype=np.uint64)
    return np.concatenate(out)


def _bk_threshold(adj, P, threshold, found):
    """Pivoting Bron-Kerbosch over int bitsets; appends maximal cliques of
    size >= threshold to ``found``."""
    stack = [(0, P, 0, 0)]
    while stack:
        R, P, X, rsize = stack.pop()
        if not P:
            if not X and rsize >= threshold:
                found.append(R)
            continue
        if rsize + P.bit_count() < threshold:
            continue
        best, pivot = -1, -1
        px = P | X
        while px:
            low = px & -px
            v = low.bit_length() - 1
            px ^= low
            c = (P & adj[v]).bit_count()
            if c > best:
                best, pivot = c, v
        cand = P & ~adj[pivot]
        branches = []
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            if rsize + P.bit_count() < threshold:
                break
            branches.append((R | low, P & adj[v], X & adj[v], rsize + 1))
            P &= ~low
            X |= low
        # LIFO: push reversed so branches run in ascending vertex order
        stack.extend(reversed(branches))


def _rows(indptr, indices, verts):
    starts = indptr[verts]
    lens = indptr[verts + 1] - starts
    total = int(lens.sum())
    base = np.repeat(starts - np.concatenate(([0], np.cumsum(lens)[:-1])), lens)
    return indices[base + np.arange(total)], np.repeat(np.arange(len(verts)), lens)


def triple_cliques(indptr, indices, exclude, min_size, expected):
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int32)
    nv = len(indptr) - 1
    covered = np.zeros(len(indices), dtype=bool)
    pos = np.full(nv, -1, dtype=np.int64)
    members, problems = [], []
    thr = min_size - 2
    for u in range(nv):
        if u == exclude:
            continue
        adj_u = indices[indptr[u]:indptr[u + 1]]
        for s in range(indptr[u], indptr[u + 1]):
            v = int(indices[s])
            if v <= u or v == exclude or covered[s]:
                continue
            cand = np.intersect1d(adj_u, indices[indptr[v]:indptr[v + 1]], assume_unique=True)
            cand = cand[cand != exclude]
            nc = len(cand)
            if nc < thr:
                problems.append((u, v, 0))
                continue
            pos[cand] = np.arange(nc)
            nb, rowid = _rows(indptr, indices, cand)
            col = pos[nb]
            keep = col >= 0
            pos[cand] = -1
            mat = np.zeros((nc, nc), dtype=bool)
            mat[rowid[keep], col[keep]] = True
            adj = [int.from_bytes(np.packbits(r, bitorder="little").tobytes(), "little") for r in mat]
            found = []
            _bk_threshold(adj, (1 << nc) - 1, thr, found)
            if not found:
                problems.append((u, v, 0))
                continue
            if len(found) > 1:
                problems.append((u, v, 1))
                continue
            R = found[0]
            if R.bit_count() + 2 != expected:
                problems.append((u, v, 2))
                continue
            clq = np.sort(np.concatenate(([u, v], cand[[i for i in range(nc) if R >> i & 1]])))
            bad = False
            for x in clq:
                row = indices[indptr[x]:indptr[x + 1]]
                others = clq[clq != x]
                loc = np.searchsorted(row, others)
                if np.any(loc >= len(row)) or np.any(row[np.minimum(loc, len(row) - 1)] != others):
                    bad = True
                    continue
                slots = indptr[x] + loc
                if covered[slots].any():
                    bad = True
                covered[slots] = True
            if bad:
                problems.append((u, v, 3))
                continue
            members.append(clq.astype(np.int32))
    mem = np.array(members, dtype=np.int32).reshape(-1, expected)
    prob = np.array(problems, dtype=np.int64).reshape(-1, 3)
    return mem, prob


def shared_vertex_profiles(indptr, indices, vertex_cliques, clique_members, exclude):
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int32)
    nv = len(indptr) - 1
    d = vertex_cliques.shape[1]
    s = clique_members.shape[1]
    tag = np.full(nv, -1, dtype=np.int64)
    iu, ju = np.triu_indices(d, 1)
    pairs_out, kind_out = [], []
    for u in range(nv):
        if u == exclude:
            continue
        cl = vertex_cliques[u]
        mem = clique_members[cl]
        # members of each clique through u, u removed; each row keeps s-1
        M = mem[mem != u].reshape(d, s - 1)
        flat = M.ravel()
        tag[flat] = np.repeat(np.arange(d), s - 1)
        nb, rowid = _rows(indptr, indices, flat)
        t = tag[nb]
        keep = (t >= 0) & (nb != u)
        R = np.bincount(rowid[keep] * d + t[keep], minlength=len(flat) * d).reshape(d, s - 1, d)
        tag[flat] = -1
        # R[i, k, j]: cross-neighbours of the k-th member of clique i in clique j
        n2 = (R == 2).sum(axis=1)
        n3 = (R == 3).sum(axis=1)
        side = (n2 == 1) & (n2 + n3 == s - 1)
        ok = side[iu, ju] & side[ju, iu]
        a, b = cl[iu], cl[ju]
        pairs_out.append(np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1))
        kind_out.append(ok.astype(np.int8))
    if not pairs_out:
        return np.zeros((0, 2), dtype=np.int32), np.zeros(0, dtype=np.int8)
    return np.concatenate(pairs_out).astype(np.int32), np.concatenate(kind_out)


def cross_counts(indptr, indices, A, B):
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int32)
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    out = np.zeros(A.shape, dtype=np.int32)
    step = max(1, 4096 // max(1, A.shape[1]))
    for p0 in range(0, len(A), step):
        a, b = A[p0:p0 + step], B[p0:p0 + step]
        nb, rowid = _rows(indptr, indices, a.ravel())
        pair = rowid // A.shape[1]
        # membership of (neighbour, pair) in B via sorted composite keys
        bkeys = np.sort((b * len(a) + np.arange(len(a))[:, None]).ravel())
        keys = nb.astype(np.int64) * len(a) + pair
        loc = np.searchsorted(bkeys, keys)
        hit = bkeys[np.minimum(loc, len(bkeys) - 1)] == keys
        out[p0:p0 + step] = np.bincount(rowid[hit], minlength=a.size).reshape(a.shape)
    return out
