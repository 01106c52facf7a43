"""Blind clique analysis of an anchored distance graph.

Everything here reads adjacency only.  Inside N(u0) the maximum cliques
are the sets C(t) of weight-6 words containing a fixed triple t; pairs of
such cliques are classified by their cross-neighbour pattern, and cliques
whose triples share a pair p are grouped into the pair-sets S(p).
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .errors import StructuralError
from .graph import DistanceGraph, find_anchor

log = logging.getLogger(__name__)

MIN_TRIPLE_CLIQUE = 14  # non-triple maximal cliques have at most 13 vertices
PAIRSET_LINKS = 8


class CliqueError(StructuralError):
    pass


@dataclass(frozen=True)
class Clique:
    id: int
    members: tuple[int, ...]


class TripleCliques(Sequence[Clique]):
    """The triple cliques of N(u0); ``members`` is a (K, size) id array."""

    def __init__(self, members: np.ndarray, anchor: int, n_vertices: int):
        self.members = members
        self.anchor = anchor
        self.n_vertices = n_vertices
        self._vertex_cliques = None

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return Clique(int(i), tuple(int(x) for x in self.members[i]))

    def __iter__(self) -> Iterator[Clique]:
        for i in range(len(self)):
            yield self[i]

    @property
    def size(self) -> int:
        return self.members.shape[1]

    @property
    def vertex_cliques(self) -> np.ndarray:
        """(n_vertices, d) clique ids through each vertex, ascending; anchor row is -1."""
        if self._vertex_cliques is None:
            flat = self.members.ravel()
            order = np.argsort(flat, kind="stable")
            counts = np.bincount(flat, minlength=self.n_vertices)
            d = int(counts.max()) if len(flat) else 0
            out = np.full((self.n_vertices, d), -1, dtype=np.int32)
            verts = flat[order]
            pos = np.arange(len(flat)) - np.repeat(np.cumsum(counts) - counts, counts)
            out[verts, pos] = (order // self.size).astype(np.int32)
            self._vertex_cliques = out
        return self._vertex_cliques


def _require_t5(g: DistanceGraph) -> None:
    if g.params is None:
        raise ValueError("graph parameters unknown")
    if g.params.t == 3:
        raise ValueError("triple cliques are only separable for m >= 6: at t=3 they have "
                         "(16-4)/3 = 4 vertices, not more than the bound 13 on other cliques")
    if g.params.t != 5:
        raise ValueError(f"unsupported t={g.params.t}")


def find_triple_cliques(g: DistanceGraph, u0: int | None = None) -> TripleCliques:
    _require_t5(g)
    if u0 is None:
        u0 = find_anchor(g)
    n = g.params.n
    size = (n - 4) // 3
    mem, prob = kernels.backend().triple_cliques(g.indptr, g.indices, u0, MIN_TRIPLE_CLIQUE, size)
    if len(prob):
        what = {0: "no large clique", 1: "several large cliques", 2: "wrong clique size",
                3: "edge already covered"}
        sample = ", ".join(f"({u},{v}): {what[int(c)]}" for u, v, c in prob[:5])
        raise CliqueError(f"{len(prob)} edges violate the triple-clique structure: {sample}")
    tc = TripleCliques(mem, u0, g.n_vertices)
    inner_edges = g.n_edges - g.degree(u0)
    if len(mem) * size * (size - 1) // 2 != inner_edges:
        raise CliqueError("triple cliques do not cover every edge of N(u0) exactly once")
    counts = np.bincount(mem.ravel(), minlength=g.n_vertices)
    counts[u0] = 20
    if np.any(counts != 20):
        raise CliqueError("some vertex is not in exactly 20 triple cliques")
    log.info("triple cliques: %d of size %d", len(mem), size)
    return tc


# --- pair relations ---------------------------------------------------------


class RelationKind(enum.Enum):
    BLOCK_PARTNER = "BlockPartner"
    SHARED_VERTEX = "SharedVertexPair"
    UNRELATED = "Unrelated"


@dataclass(frozen=True)
class CliquePairRelation:
    kind: RelationKind
    shared: int | None = None
    exceptional: tuple[int, int] | None = None
    cross: tuple[tuple[int, ...], tuple[int, ...]] = field(default=((), ()), repr=False)


def cross_counts(g: DistanceGraph, a: Sequence[int], b: Sequence[int]) -> np.ndarray:
    """For each vertex of a: how many of its neighbours lie in b."""
    mark = np.zeros(g.n_vertices, dtype=bool)
    mark[np.asarray(b, dtype=np.int64)] = True
    return np.array([int(mark[g.neighbors(int(x))].sum()) for x in a], dtype=np.int64)


def clique_pair_profile(g: DistanceGraph, c1: Clique, c2: Clique) -> CliquePairRelation:
    """Classify two triple cliques by their cross-neighbour pattern.

    Cross-neighbours are counted among the non-shared members only.
    """
    if c1.id == c2.id or set(c1.members) == set(c2.members):
        raise ValueError("clique_pair_profile needs two distinct cliques")
    shared = set(c1.members) & set(c2.members)
    a = [x for x in c1.members if x not in shared]
    b = [x for x in c2.members if x not in shared]
    ca, cb = cross_counts(g, a, b), cross_counts(g, b, a)
    cross = (tuple(ca.tolist()), tuple(cb.tolist()))
    if not shared:
        if np.all(ca == 3) and np.all(cb == 3):
            return CliquePairRelation(RelationKind.BLOCK_PARTNER, cross=cross)
        return CliquePairRelation(RelationKind.UNRELATED, cross=cross)
    if len(shared) == 1:
        ok = all((c == 2).sum() == 1 and ((c == 2) | (c == 3)).all() for c in (ca, cb))
        if ok:
            ex = (a[int(np.flatnonzero(ca == 2)[0])], b[int(np.flatnonzero(cb == 2)[0])])
            return CliquePairRelation(RelationKind.SHARED_VERTEX, next(iter(shared)), ex, cross)
    return CliquePairRelation(RelationKind.UNRELATED, cross=cross)


@dataclass
class SVPRelation:
    """Shared-vertex-pair relation as a CSR graph on clique ids."""

    indptr: np.ndarray
    indices: np.ndarray

    def row(self, c: int) -> np.ndarray:
        return self.indices[self.indptr[c]:self.indptr[c + 1]]

    @property
    def n_pairs(self) -> int:
        return len(self.indices) // 2


def shared_vertex_relation(g: DistanceGraph, cliques: TripleCliques) -> SVPRelation:
    pairs, kind = kernels.backend().shared_vertex_profiles(
        g.indptr, g.indices, cliques.vertex_cliques, cliques.members, cliques.anchor)
    good = pairs[kind == 1].astype(np.int64)
    k = len(cliques)
    src = np.concatenate([good[:, 0], good[:, 1]])
    dst = np.concatenate([good[:, 1], good[:, 0]])
    key = src * k + dst
    key.sort()
    if len(key) and np.any(key[1:] == key[:-1]):
        raise CliqueError("two cliques share more than one vertex")
    indptr = np.zeros(k + 1, dtype=np.int64)
    np.cumsum(np.bincount(key // k, minlength=k), out=indptr[1:])
    log.info("shared-vertex pairs: %d", len(good))
    return SVPRelation(indptr, (key % k).astype(np.int32))


# --- pair sets ---------------------------------------------------------------


@dataclass(frozen=True)
class PairSet:
    id: int
    cliques: tuple[int, ...]


class PairSets(Sequence[PairSet]):
    """``members``: (P, n-2) clique ids; ``partner``: BlockPartner of each clique
    inside each of its pair-sets (aligned with ``members``)."""

    def __init__(self, members: np.ndarray, partner: np.ndarray, n_cliques: int):
        self.members = members
        self.partner = partner
        self.n_cliques = n_cliques
        flat = members.ravel()
        order = np.argsort(flat, kind="stable")
        self.clique_pairsets = (order // members.shape[1]).reshape(n_cliques, -1).astype(np.int32)

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return PairSet(int(i), tuple(int(x) for x in self.members[i]))

    def __iter__(self) -> Iterator[PairSet]:
        for i in range(len(self)):
            yield self[i]

    def block_partners(self) -> np.ndarray:
        """(E, 2) BlockPartner clique pairs, a < b, sorted."""
        a = self.members.ravel().astype(np.int64)
        b = self.partner.ravel().astype(np.int64)
        keep = a < b
        e = np.stack([a[keep], b[keep]], axis=1)
        return e[np.lexsort((e[:, 1], e[:, 0]))]


def _links(svp: SVPRelation, rows: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """For each clique in rows: number of its SVP neighbours inside targets."""
    starts, ends = svp.indptr[rows], svp.indptr[rows + 1]
    lens = ends - starts
    idx = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(lens.sum())
    nb = svp.indices[idx]
    hit = np.isin(nb, targets)
    return np.bincount(np.repeat(np.arange(len(rows)), lens)[hit], minlength=len(rows))


def _grow_pairset(svp: SVPRelation, c1: int, c2: int) -> np.ndarray:
    T = np.union1d(np.intersect1d(svp.row(c1), svp.row(c2), assume_unique=True), [c1, c2])
    core = T[_links(svp, T, T) >= PAIRSET_LINKS]
    starts, ends = svp.indptr[core], svp.indptr[core + 1]
    nb = np.concatenate([svp.indices[a:b] for a, b in zip(starts, ends)])
    cand, cnt = np.unique(nb, return_counts=True)
    extra = cand[(cnt >= PAIRSET_LINKS) & ~np.isin(cand, core)]
    return np.union1d(core, extra)


def build_pair_sets(g: DistanceGraph, cliques: TripleCliques,
                    svp: SVPRelation | None = None) -> PairSets:
    """Assemble the pair-sets S(p) from the shared-vertex relation.

    A shared-vertex pair (c1, c2) has triples meeting in a pair p; the
    cliques linked to both are S(p) minus two block partners, plus two
    stray cliques with few links, which the link threshold strips off.
    Inside a pair-set the cliques that are not shared-vertex related must
    pair up as block partners, which is re-checked on the adjacency.
    """
    _require_t5(g)
    if svp is None:
        svp = shared_vertex_relation(g, cliques)
    n = g.params.n
    k = len(cliques)
    want = n - 2
    sets: list[np.ndarray] = []
    partners: list[np.ndarray] = []
    owned = np.full((k, 3), -1, dtype=np.int64)
    n_owned = np.zeros(k, dtype=np.int64)
    for c1 in range(k):
        while n_owned[c1] < 3:
            nbrs = svp.row(c1)
            mine = owned[c1, :n_owned[c1]]
            clash = np.isin(owned[nbrs], mine).any(axis=1) if len(mine) else np.zeros(len(nbrs), bool)
            free = nbrs[~clash]
            if len(free) == 0:
                raise CliqueError(f"clique {c1} lies in {n_owned[c1]} pair-sets, expected 3")
            c2 = int(free[0])
            S = _grow_pairset(svp, c1, c2)
            if len(S) != want:
                raise CliqueError(f"pair-set grown from ({c1},{c2}) has {len(S)} cliques, expected {want}")
            if np.any(n_owned[S] >= 3):
                raise CliqueError("a clique would lie in more than 3 pair-sets")
            pid = len(sets)
            owned[S, n_owned[S]] = pid
            n_owned[S] += 1
            sets.append(S)
            partners.append(_match_partners(svp, S))
    expected = n * (n - 1) // 2
    if len(sets) != expected:
        raise CliqueError(f"found {len(sets)} pair-sets, expected {expected}")
    members = np.array(sets, dtype=np.int32)
    ps = PairSets(members, np.array(partners, dtype=np.int32), k)
    _check_pairset_intersections(ps)
    _check_block_partners(g, cliques, ps.block_partners())
    log.info("pair-sets: %d of %d cliques", len(sets), want)
    return ps


def _match_partners(svp: SVPRelation, S: np.ndarray) -> np.ndarray:
    inside = np.array([np.isin(S, svp.row(c), assume_unique=True) for c in S])
    np.fill_diagonal(inside, True)
    miss = ~inside
    if not np.all(miss.sum(axis=1) == 1):
        raise CliqueError("pair-set cliques not related by shared vertex do not form a matching")
    j = miss.argmax(axis=1)
    if not np.array_equal(j[j], np.arange(len(S))):
        raise CliqueError("block-partner matching is not symmetric")
    return S[j]


def _check_block_partners(g: DistanceGraph, cliques: TripleCliques, bp: np.ndarray) -> None:
    """Every claimed partner pair: disjoint, each member with 3 cross-neighbours."""
    A = np.ascontiguousarray(cliques.members[bp[:, 0]])
    B = np.ascontiguousarray(cliques.members[bp[:, 1]])
    impl = kernels.backend()
    ab = impl.cross_counts(g.indptr, g.indices, A, B)
    ba = impl.cross_counts(g.indptr, g.indices, B, A)
    overlap = (np.sort(np.concatenate([A, B], axis=1), axis=1)[:, 1:]
               == np.sort(np.concatenate([A, B], axis=1), axis=1)[:, :-1]).any(axis=1)
    bad = overlap | (ab != 3).any(axis=1) | (ba != 3).any(axis=1)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise CliqueError(f"cliques {bp[i, 0]} and {bp[i, 1]} are not block partners")


def _check_pairset_intersections(ps: PairSets) -> None:
    cp = ps.clique_pairsets  # (K, 3)
    a = np.concatenate([cp[:, 0], cp[:, 0], cp[:, 1]]).astype(np.int64)
    b = np.concatenate([cp[:, 1], cp[:, 2], cp[:, 2]]).astype(np.int64)
    if np.any(a == b):
        raise CliqueError("a clique is listed twice in one pair-set")
    key = np.minimum(a, b) * len(ps) + np.maximum(a, b)
    if len(np.unique(key)) != len(key):
        raise CliqueError("two pair-sets share more than one clique")


def blocks_from_graph(g: DistanceGraph, cliques: TripleCliques,
                      pair_sets: PairSets | None = None) -> np.ndarray:
    """SQS blocks as (B, 4) sorted clique-id quadruples.

    Each block {a,b,c,d} shows up as the four triple cliques of its
    3-subsets, pairwise block partners (a K4 in the partner graph).
    """
    if pair_sets is None:
        pair_sets = build_pair_sets(g, cliques)
    bp = pair_sets.block_partners()
    k = len(cliques)
    deg = np.bincount(bp.ravel(), minlength=k)
    if np.any(deg != 3):
        raise CliqueError("every triple clique must have exactly 3 block partners")
    nb = np.full((k, 3), -1, dtype=np.int64)
    src = np.concatenate([bp[:, 0], bp[:, 1]])
    dst = np.concatenate([bp[:, 1], bp[:, 0]])
    order = np.lexsort((dst, src))
    nb[:] = dst[order].reshape(k, 3)
    quads = np.sort(np.concatenate([np.arange(k)[:, None], nb], axis=1), axis=1)
    blocks = np.unique(quads, axis=0)
    n = g.params.n
    if len(blocks) * 4 != k or len(blocks) != n * (n - 1) * (n - 2) // 24:
        raise CliqueError("block-partner graph is not a disjoint union of K4s")
    return blocks


# --- verification against the sealed truth ------------------------------------


def hidden_triples(g: DistanceGraph, cliques: TripleCliques) -> np.ndarray:
    """(K, 3) 0-based coordinate triple of every clique, read from the sealed
    truth.  For tests and reports only; the analysis never calls this."""
    from .graph import unseal

    truth = unseal(g)
    common = np.bitwise_and.reduce(truth[cliques.members], axis=1)
    if np.any(np.bitwise_count(common) != 3):
        raise CliqueError("a clique's members do not share exactly three coordinates")
    bits = ((common[:, None] >> np.arange(64, dtype=np.uint64)) & np.uint64(1)).astype(bool)
    return np.nonzero(bits)[1].reshape(-1, 3)


def blocks_as_coordinates(g: DistanceGraph, cliques: TripleCliques, blocks: np.ndarray) -> np.ndarray:
    """Clique-id block quadruples -> sorted (B, 4) coordinate 4-sets (truth-side)."""
    tri = hidden_triples(g, cliques)
    out = []
    for quad in np.asarray(blocks).tolist():
        pts = np.unique(tri[quad].ravel())
        if len(pts) != 4:
            raise CliqueError(f"clique quadruple {quad} does not cover a 4-set")
        out.append(pts)
    res = np.array(out, dtype=np.int64).reshape(-1, 4)
    return res[np.lexsort(res.T[::-1])]
