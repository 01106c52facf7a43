"""Minimum distance graphs: construction, scrambling, persistence.

A :class:`DistanceGraph` is an opaque-vertex CSR adjacency.  When it was
built from the code it also carries the codeword of every vertex, but that
map is sealed: no public attribute or method returns it.  Only
:func:`unseal`, called by verification code and tests, can read it.
"""

from __future__ import annotations

import io
import json
import logging
import re
import struct
from itertools import combinations

import numpy as np

from .code import (
    CodeError,
    CodeParams,
    Word,
    check_permutation,
    permute_mask,
    popcount,
    preparata_contains,
    supports_matrix,
)
from .enumeration import neighbors_at_distance6

log = logging.getLogger(__name__)

GRAPH_MAGIC = b"PREPGRF"
GRAPH_VERSION = 1
DOT_MAX_VERTICES = 2000


class GraphError(ValueError):
    pass


class _Sealed:
    """Ground truth of a built graph: per-vertex word masks relative to the
    anchor, plus the anchor's absolute word."""

    __slots__ = ("masks", "anchor_bits")

    def __init__(self, masks: np.ndarray, anchor_bits: int):
        self.masks = masks
        self.anchor_bits = anchor_bits

    def __repr__(self) -> str:
        return "<sealed>"


class DistanceGraph:
    """Undirected simple graph on vertices 0..n_vertices-1 in CSR form."""

    __slots__ = ("indptr", "indices", "params", "_sealed")

    def __init__(self, indptr: np.ndarray, indices: np.ndarray, params: CodeParams | None = None,
                 sealed: _Sealed | None = None):
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int32)
        self.params = params
        self._sealed = sealed
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False

    @classmethod
    def from_edges(cls, n: int, edges: np.ndarray, params: CodeParams | None = None,
                   sealed: _Sealed | None = None) -> "DistanceGraph":
        indptr, indices = csr_from_edges(n, edges)
        return cls(indptr, indices, params, sealed)

    @property
    def n_vertices(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    @property
    def has_truth(self) -> bool:
        return self._sealed is not None

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        k = np.searchsorted(row, v)
        return bool(k < len(row) and row[k] == v)

    def edges(self) -> np.ndarray:
        """(E, 2) int array of edges i < j, sorted lexicographically."""
        src = np.repeat(np.arange(self.n_vertices, dtype=np.int64), self.degrees())
        keep = src < self.indices
        return np.stack([src[keep], self.indices[keep].astype(np.int64)], axis=1)

    def same_adjacency(self, other: "DistanceGraph") -> bool:
        return (np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def induced(self, verts) -> "DistanceGraph":
        """Induced subgraph relabelled 0..k-1 in the given vertex order (no truth)."""
        verts = np.asarray(verts, dtype=np.int64)
        pos = np.full(self.n_vertices, -1, dtype=np.int64)
        pos[verts] = np.arange(len(verts))
        e = self.edges()
        a, b = pos[e[:, 0]], pos[e[:, 1]]
        keep = (a >= 0) & (b >= 0)
        return DistanceGraph.from_edges(len(verts), np.stack([a[keep], b[keep]], axis=1), self.params)

    def __repr__(self) -> str:
        return f"DistanceGraph(n_vertices={self.n_vertices}, n_edges={self.n_edges})"


def unseal(g) -> np.ndarray:
    """Verification-only: relative word masks of all vertices (uint64)."""
    sealed = getattr(g, "_sealed", None)
    if sealed is None:
        raise GraphError("graph carries no ground truth")
    return sealed.masks


def unseal_anchor(g) -> int:
    sealed = getattr(g, "_sealed", None)
    if sealed is None:
        raise GraphError("graph carries no ground truth")
    return sealed.anchor_bits


def check_invariants(g: DistanceGraph) -> None:
    """Symmetric, irreflexive, sorted rows; raises GraphError otherwise."""
    n = g.n_vertices
    if g.indptr[0] != 0 or np.any(np.diff(g.indptr) < 0) or g.indptr[-1] != len(g.indices):
        raise GraphError("bad CSR offsets")
    if len(g.indices) and (g.indices.min() < 0 or g.indices.max() >= n):
        raise GraphError("neighbour id out of range")
    src = np.repeat(np.arange(n, dtype=np.int64), g.degrees())
    if np.any(src == g.indices):
        raise GraphError("self loop")
    key = src * n + g.indices
    if np.any(np.diff(key) <= 0):
        raise GraphError("rows not strictly sorted")
    rev = np.sort(g.indices.astype(np.int64) * n + src)
    if not np.array_equal(rev, key):
        raise GraphError("adjacency not symmetric")


def csr_from_edges(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(edges) and (edges.min() < 0 or edges.max() >= n):
        raise GraphError("edge endpoint out of range")
    if np.any(edges[:, 0] == edges[:, 1]):
        raise GraphError("self loop")
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    key = np.unique(src * n + dst)
    src, dst = key // n, key % n
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return indptr, dst.astype(np.int32)


# --- construction -------------------------------------------------------------


def weight6_edges(masks: np.ndarray, offset: int = 0) -> np.ndarray:
    """Edges among weight-6 supports: pairs meeting in exactly 3 coordinates.

    Two weight-6 supports sharing two triples would share >= 4 coordinates,
    so grouping vertices by each of their 20 triples lists every edge once.
    """
    sup = supports_matrix(masks)
    if len(masks) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if sup.shape[1] != 6 or np.any(sup < 0):
        raise GraphError("weight6_edges needs weight-6 masks")
    combos = np.array(list(combinations(range(6), 3)))
    tri = sup[:, combos]  # (k, 20, 3)
    tkey = (tri[..., 0] * 64 + tri[..., 1]) * 64 + tri[..., 2]
    owner = np.repeat(np.arange(len(masks), dtype=np.int64), len(combos))
    order = np.lexsort((owner, tkey.ravel()))
    tk, ow = tkey.ravel()[order], owner[order]
    starts = np.flatnonzero(np.r_[True, tk[1:] != tk[:-1]])
    sizes = np.diff(np.r_[starts, len(tk)])
    out = []
    for size in np.unique(sizes):
        if size < 2:
            continue
        grp = starts[sizes == size]
        members = ow[grp[:, None] + np.arange(size)]  # (g, size)
        iu, ju = np.triu_indices(size, 1)
        out.append(np.stack([members[:, iu].ravel(), members[:, ju].ravel()], axis=1))
    if not out:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(out) + offset


def _anchor_word(params: CodeParams, anchor: Word | None) -> Word:
    if anchor is None:
        return Word.zero(params.n)
    if anchor.n != params.n:
        raise CodeError(f"anchor length {anchor.n} does not match n={params.n}")
    if not preparata_contains(anchor, params):
        raise CodeError("anchor is not a codeword of P(m)")
    return anchor


def build_n0_graph(params: CodeParams, anchor: Word | None = None, threads: int = 1,
                   coordinate_permutation=None) -> DistanceGraph:
    """Graph on {anchor} ∪ N(anchor); vertex 0 is the anchor.

    With ``coordinate_permutation`` (0-based, coordinate i -> pi[i]) the
    graph is that of the permuted code pi(P) anchored at pi(anchor).
    """
    if params.t not in (3, 5):
        raise CodeError("build_n0_graph supports t in {3, 5}")
    a = _anchor_word(params, anchor)
    rel = neighbors_at_distance6(a, params, threads=threads) ^ np.uint64(a.bits)
    abits = a.bits
    if coordinate_permutation is not None:
        pi = [int(x) for x in coordinate_permutation]
        check_permutation(pi, params.n)
        from .reconstruct import permute_masks

        rel = permute_masks(rel, pi)
        abits = permute_mask(abits, pi)
    from .enumeration import canonical

    rel = canonical(rel)
    k = len(rel)
    star = np.stack([np.zeros(k, dtype=np.int64), np.arange(1, k + 1)], axis=1)
    edges = np.concatenate([star, weight6_edges(rel, offset=1)])
    truth = np.concatenate([np.zeros(1, dtype=np.uint64), rel])
    g = DistanceGraph.from_edges(k + 1, edges, params, _Sealed(truth, abits))
    log.info("built N0 graph: %d vertices, %d edges", g.n_vertices, g.n_edges)
    return g


def build_full_graph(params: CodeParams) -> DistanceGraph:
    """Whole minimum distance graph (t = 3 only): 256 vertices."""
    if params.t != 3:
        raise CodeError("build_full_graph is limited to t = 3")
    from .code import full_code

    masks = np.array([w.bits for w in full_code(params)], dtype=np.uint64)
    d = popcount(masks[:, None] ^ masks[None, :])
    i, j = np.nonzero(np.triu(d == 6, 1))
    return DistanceGraph.from_edges(len(masks), np.stack([i, j], axis=1), params, _Sealed(masks, 0))


def flip_edge(g: DistanceGraph, u: int, v: int) -> DistanceGraph:
    """Copy of g with the pair {u, v} toggled; the sealed truth is kept, so
    the result is a corrupted graph that still claims its codewords."""
    if u == v or not (0 <= u < g.n_vertices and 0 <= v < g.n_vertices):
        raise GraphError(f"bad vertex pair ({u}, {v})")
    e = g.edges()
    a, b = min(u, v), max(u, v)
    hit = (e[:, 0] == a) & (e[:, 1] == b)
    e = e[~hit] if hit.any() else np.vstack([e, [[a, b]]])
    return DistanceGraph.from_edges(g.n_vertices, e, g.params, g._sealed)


def scramble_permutation(n_vertices: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).permutation(n_vertices)


def relabel(g: DistanceGraph, perm: np.ndarray) -> DistanceGraph:
    """Vertex v becomes perm[v]; sealed truth moves in lockstep."""
    perm = np.asarray(perm, dtype=np.int64)
    n = g.n_vertices
    if len(perm) != n or not np.array_equal(np.sort(perm), np.arange(n)):
        raise GraphError("relabel needs a permutation of the vertex ids")
    e = g.edges()
    sealed = None
    if g._sealed is not None:
        masks = np.empty_like(g._sealed.masks)
        masks[perm] = g._sealed.masks
        sealed = _Sealed(masks, g._sealed.anchor_bits)
    return DistanceGraph.from_edges(n, perm[e], g.params, sealed)


def scramble(g: DistanceGraph, seed: int) -> DistanceGraph:
    return relabel(g, scramble_permutation(g.n_vertices, seed))


def find_anchor(g: DistanceGraph) -> int:
    """The unique maximum-degree vertex, which must be adjacent to all others."""
    deg = g.degrees()
    if len(deg) == 0:
        raise GraphError("empty graph has no anchor")
    top = int(deg.max())
    hits = np.flatnonzero(deg == top)
    if len(hits) != 1 or top != g.n_vertices - 1:
        raise GraphError("graph is not a closed neighbourhood: no unique universal vertex")
    return int(hits[0])


# --- neighbourhood oracle ----------------------------------------------------


class LocalGraph:
    """Induced graph on {u} ∪ N(u) with global vertex ids (``vertices``)."""

    __slots__ = ("vertices", "graph")

    def __init__(self, vertices: np.ndarray, graph: DistanceGraph):
        self.vertices = vertices
        self.graph = graph

    def local(self, global_id: int) -> int:
        k = np.flatnonzero(self.vertices == global_id)
        if len(k) != 1:
            raise GraphError(f"vertex {global_id} not in this neighbourhood")
        return int(k[0])


class NeighborhoodOracle:
    """Materializes N(u) on demand for a truth-carrying anchored graph.

    Codewords already in the graph keep their ids; new codewords receive
    fresh ids in a seeded random order, so ids leak nothing.  The
    oracle's truth is sealed exactly like a graph's.
    """

    def __init__(self, g: DistanceGraph, seed: int = 0):
        if g._sealed is None or g.params is None:
            raise GraphError("oracle needs a graph built from the code")
        self.params = g.params
        self._rng = np.random.default_rng(seed)
        masks = g._sealed.masks
        self._sealed = _Sealed(masks.copy(), g._sealed.anchor_bits)
        self._ids = {int(m): i for i, m in enumerate(masks)}
        self.base_vertices = g.n_vertices

    @property
    def n_known(self) -> int:
        return len(self._sealed.masks)

    def neighborhood(self, v: int) -> LocalGraph:
        if not 0 <= v < self.n_known:
            raise GraphError(f"unknown vertex {v}")
        p = self.params
        rel_v = int(self._sealed.masks[v])
        absolute = Word(rel_v ^ self._sealed.anchor_bits, p.n)
        nbrs = neighbors_at_distance6(absolute, p) ^ np.uint64(self._sealed.anchor_bits)
        fresh = [int(m) for m in nbrs if int(m) not in self._ids]
        fresh = [fresh[i] for i in self._rng.permutation(len(fresh))]
        base = self.n_known
        for i, m in enumerate(fresh):
            self._ids[m] = base + i
        if fresh:
            self._sealed.masks = np.concatenate([self._sealed.masks, np.array(fresh, dtype=np.uint64)])
        ids = np.array([v] + [self._ids[int(m)] for m in nbrs], dtype=np.int64)
        order = np.argsort(ids)
        ids = ids[order]
        # local adjacency from the u-frame: N(u) XOR u are weight-6 supports
        frame = (nbrs ^ np.uint64(rel_v))
        e = weight6_edges(frame, offset=1)
        e = np.concatenate([np.stack([np.zeros(len(nbrs), np.int64), np.arange(1, len(nbrs) + 1)], 1), e])
        inv = np.empty(len(order), dtype=np.int64)
        inv[order] = np.arange(len(order))
        lg = DistanceGraph.from_edges(len(ids), inv[e], p)
        return LocalGraph(ids, lg)


# --- export / import -----------------------------------------------------------


def export_graph(g: DistanceGraph, fmt: str) -> bytes:
    if fmt == "graph6":
        return to_graph6(g)
    if fmt == "dot":
        return to_dot(g)
    if fmt == "json":
        return to_json(g)
    if fmt == "bin":
        return to_bin(g)
    raise GraphError(f"unknown format {fmt!r}")


def import_graph(data: bytes, fmt: str, params: CodeParams | None = None) -> DistanceGraph:
    try:
        if fmt == "graph6":
            return from_graph6(data, params)
        if fmt == "dot":
            return from_dot(data, params)
        if fmt == "json":
            return from_json(data, params)
        if fmt == "bin":
            return from_bin(data, params)
    except GraphError:
        raise
    except (ValueError, KeyError, TypeError, struct.error) as exc:
        raise GraphError(f"malformed {fmt} input: {exc}") from exc
    raise GraphError(f"unknown format {fmt!r}")


def _g6_size(n: int) -> bytes:
    if n < 63:
        return bytes([n + 63])
    if n < 258048:
        return bytes([126] + [((n >> s) & 63) + 63 for s in (12, 6, 0)])
    if n < 1 << 36:
        return bytes([126, 126] + [((n >> s) & 63) + 63 for s in (30, 24, 18, 12, 6, 0)])
    raise GraphError("graph too large for graph6")


def to_graph6(g: DistanceGraph, header: bool = True) -> bytes:
    n = g.n_vertices
    nbits = n * (n - 1) // 2
    nchars = -(-nbits // 6)
    body = np.zeros(nchars, dtype=np.uint8)
    e = g.edges()
    if len(e):
        i, j = e[:, 0], e[:, 1]
        k = j * (j - 1) // 2 + i  # column-wise upper triangle
        np.add.at(body, k // 6, (1 << (5 - k % 6)).astype(np.uint8))
    out = io.BytesIO()
    if header:
        out.write(b">>graph6<<")
    out.write(_g6_size(n))
    out.write((body + 63).tobytes())
    out.write(b"\n")
    return out.getvalue()


def from_graph6(data: bytes, params: CodeParams | None = None) -> DistanceGraph:
    data = data.strip()
    if data.startswith(b">>graph6<<"):
        data = data[10:]
    if not data:
        raise GraphError("graph6: missing size")
    arr = np.frombuffer(data, dtype=np.uint8).astype(np.int64)
    if np.any(arr < 63) or np.any(arr > 126):
        raise GraphError("graph6: byte outside 63..126")
    arr = arr - 63
    if arr[0] < 63:
        n, pos = int(arr[0]), 1
    elif len(arr) >= 4 and arr[1] < 63:
        n, pos = (int(arr[1]) << 12) | (int(arr[2]) << 6) | int(arr[3]), 4
    elif len(arr) >= 8:
        n = 0
        for x in arr[2:8]:
            n = (n << 6) | int(x)
        pos = 8
    else:
        raise GraphError("graph6: truncated size")
    nbits = n * (n - 1) // 2
    body = arr[pos:]
    if len(body) != -(-nbits // 6):
        raise GraphError(f"graph6: expected {-(-nbits // 6)} body bytes, got {len(body)}")
    parts = []
    step = 1 << 22
    shifts = np.arange(5, -1, -1)
    for c0 in range(0, len(body), step):
        chunk = body[c0:c0 + step]
        bits = ((chunk[:, None] >> shifts) & 1).ravel()
        k = np.flatnonzero(bits) + 6 * c0
        if len(k) and k[-1] >= nbits:
            raise GraphError("graph6: padding bits set")
        parts.append(k)
    k = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    j = ((1 + np.sqrt(1 + 8 * k.astype(np.float64))) // 2).astype(np.int64)
    # repair float rounding so that j(j-1)/2 <= k < j(j+1)/2
    j -= (j * (j - 1) // 2 > k)
    j += ((j + 1) * j // 2 <= k)
    i = k - j * (j - 1) // 2
    return DistanceGraph.from_edges(n, np.stack([i, j], axis=1), params)


def to_dot(g: DistanceGraph) -> bytes:
    if g.n_vertices > DOT_MAX_VERTICES:
        raise GraphError(f"dot export limited to {DOT_MAX_VERTICES} vertices")
    lines = ["graph G {"]
    lines += [f"  {v};" for v in range(g.n_vertices)]
    lines += [f"  {i} -- {j};" for i, j in g.edges()]
    lines.append("}")
    return ("\n".join(lines) + "\n").encode()


_DOT_EDGE = re.compile(r"^\s*(\d+)\s*--\s*(\d+)\s*;?\s*$")
_DOT_NODE = re.compile(r"^\s*(\d+)\s*;?\s*$")


def from_dot(data: bytes, params: CodeParams | None = None) -> DistanceGraph:
    text = data.decode()
    body = text.strip()
    if not re.match(r"^(strict\s+)?graph\b[^{]*\{", body) or not body.endswith("}"):
        raise GraphError("dot: expected 'graph { ... }'")
    inner = body[body.index("{") + 1:-1]
    nodes, edges = set(), []
    for line in inner.splitlines():
        if not line.strip():
            continue
        m = _DOT_EDGE.match(line)
        if m:
            edges.append((int(m.group(1)), int(m.group(2))))
            continue
        m = _DOT_NODE.match(line)
        if m:
            nodes.add(int(m.group(1)))
            continue
        raise GraphError(f"dot: cannot parse line {line.strip()!r}")
    n = max(list(nodes) + [x for e in edges for x in e], default=-1) + 1
    if n > DOT_MAX_VERTICES:
        raise GraphError(f"dot import limited to {DOT_MAX_VERTICES} vertices")
    return DistanceGraph.from_edges(n, np.array(edges, dtype=np.int64).reshape(-1, 2), params)


def to_json(g: DistanceGraph) -> bytes:
    return json.dumps({"n": g.n_vertices, "edges": g.edges().tolist()}).encode()


def from_json(data: bytes, params: CodeParams | None = None) -> DistanceGraph:
    obj = json.loads(data)
    n = int(obj["n"])
    e = np.array(obj["edges"], dtype=np.int64).reshape(-1, 2)
    if np.any(e[:, 0] >= e[:, 1]):
        raise GraphError("json: edges must satisfy i < j")
    return DistanceGraph.from_edges(n, e, params)


def to_bin(g: DistanceGraph) -> bytes:
    head = GRAPH_MAGIC + struct.pack("<BI", GRAPH_VERSION, g.n_vertices)
    return (head + g.indptr.astype("<u8").tobytes() + g.indices.astype("<u4").tobytes()
            + b"\0")  # truth section flag: never exported


def from_bin(data: bytes, params: CodeParams | None = None) -> DistanceGraph:
    hl = len(GRAPH_MAGIC) + 5
    if len(data) < hl or data[:len(GRAPH_MAGIC)] != GRAPH_MAGIC:
        raise GraphError("bin: bad magic")
    version, n = struct.unpack("<BI", data[len(GRAPH_MAGIC):hl])
    if version != GRAPH_VERSION:
        raise GraphError(f"bin: unsupported version {version}")
    off_end = hl + 8 * (n + 1)
    if len(data) < off_end + 1:
        raise GraphError("bin: truncated offsets")
    indptr = np.frombuffer(data[hl:off_end], dtype="<u8").astype(np.int64)
    nnz = int(indptr[-1])
    if len(data) != off_end + 4 * nnz + 1:
        raise GraphError("bin: size does not match offsets")
    if data[-1] != 0:
        raise GraphError("bin: truth sections are not supported")
    indices = np.frombuffer(data[off_end:off_end + 4 * nnz], dtype="<u4").astype(np.int32)
    g = DistanceGraph(indptr, indices, params)
    check_invariants(g)
    return g
