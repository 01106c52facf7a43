"""Coordinate labelling of an unlabelled distance graph.

Labels are 1-based coordinates {1..n}.  A support is stored as a uint64
mask with bit (label - 1).  The anchor u0 has the empty support; every
vertex of N(u0) gets a 6-set; shell extension adds vertices further out.

Only adjacency is read until :func:`verify`, which compares the labelling
against the sealed ground truth and emits an equivalence certificate.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .cliques import (
    PairSets,
    TripleCliques,
    build_pair_sets,
    find_triple_cliques,
    shared_vertex_relation,
)
from .code import mask_support, popcount
from .errors import BudgetExceeded, StructuralError
from .graph import DistanceGraph, GraphError, NeighborhoodOracle, find_anchor, unseal, unseal_anchor, weight6_edges

log = logging.getLogger(__name__)


class AmbiguousIntersection(StructuralError):
    pass


class ConsistencyError(StructuralError):
    pass


class NoPerfectMatching(StructuralError):
    pass


class AmbiguousMatching(StructuralError):
    pass


def _bit(label: int) -> int:
    return 1 << (label - 1)


def _labels(mask: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in mask_support(int(mask)))


# --- labelling state ----------------------------------------------------------


@dataclass
class Labeling:
    n: int
    anchor: int
    vertex_masks: np.ndarray
    labelled: np.ndarray
    clique_triples: np.ndarray
    pairset_pairs: np.ndarray
    shells: list = field(default_factory=list)
    edges_checked: int = 0
    seed_clique: int = -1

    @classmethod
    def empty(cls, n: int, anchor: int, n_vertices: int, n_cliques: int, n_pairsets: int) -> "Labeling":
        lab = cls(n, anchor, np.zeros(n_vertices, dtype=np.uint64), np.zeros(n_vertices, dtype=bool),
                  np.zeros((n_cliques, 3), dtype=np.int16), np.zeros((n_pairsets, 2), dtype=np.int16))
        lab.labelled[anchor] = True
        return lab

    def copy(self) -> "Labeling":
        return Labeling(self.n, self.anchor, self.vertex_masks.copy(), self.labelled.copy(),
                        self.clique_triples.copy(), self.pairset_pairs.copy(), list(self.shells),
                        self.edges_checked, self.seed_clique)

    def grow(self, n_vertices: int) -> None:
        extra = n_vertices - len(self.vertex_masks)
        if extra > 0:
            self.vertex_masks = np.concatenate([self.vertex_masks, np.zeros(extra, np.uint64)])
            self.labelled = np.concatenate([self.labelled, np.zeros(extra, bool)])

    def support(self, v: int) -> tuple[int, ...] | None:
        if v >= len(self.labelled) or not self.labelled[v]:
            return None
        return _labels(self.vertex_masks[v])

    @property
    def vertex_supports(self) -> dict[int, tuple[int, ...]]:
        return {int(v): _labels(self.vertex_masks[v]) for v in np.flatnonzero(self.labelled)}

    @property
    def n_labelled(self) -> int:
        return int(self.labelled.sum())

    def save(self, path: str | Path) -> None:
        np.savez_compressed(path, n=self.n, anchor=self.anchor, vertex_masks=self.vertex_masks,
                            labelled=self.labelled, clique_triples=self.clique_triples,
                            pairset_pairs=self.pairset_pairs, shells=np.array(self.shells, dtype=np.int64),
                            edges_checked=self.edges_checked, seed_clique=self.seed_clique)

    @classmethod
    def load(cls, path: str | Path) -> "Labeling":
        with np.load(path) as z:
            return cls(int(z["n"]), int(z["anchor"]), z["vertex_masks"], z["labelled"], z["clique_triples"],
                       z["pairset_pairs"], z["shells"].tolist(), int(z["edges_checked"]),
                       int(z["seed_clique"]) if "seed_clique" in z else -1)


class _Book:
    """Bidirectional clique<->triple and pair-set<->pair assignment with
    conflict detection, plus the pair-set meet table."""

    def __init__(self, lab: Labeling, cliques: TripleCliques, ps: PairSets):
        self.lab = lab
        self.cliques = cliques
        self.cp = ps.clique_pairsets
        self.ps = ps
        self.meet: dict[tuple[int, int], int] = {}
        for c, row in enumerate(self.cp.tolist()):
            for a, b in combinations(sorted(row), 2):
                if (a, b) in self.meet:
                    raise AmbiguousIntersection(f"pair-sets {a} and {b} share several cliques")
                self.meet[(a, b)] = c
        self.tri: dict[tuple[int, ...], int] = {}
        self.pair: dict[tuple[int, int], int] = {}
        for c, t in enumerate(lab.clique_triples.tolist()):
            if t[0]:
                self.tri[tuple(t)] = c
        for p, t in enumerate(lab.pairset_pairs.tolist()):
            if t[0]:
                self.pair[tuple(t)] = p

    def set_clique(self, c: int, triple) -> None:
        t = tuple(sorted(triple))
        old = tuple(self.lab.clique_triples[c].tolist())
        if old[0] and old != t:
            raise ConsistencyError(f"clique {c} labelled both {old} and {t}")
        if self.tri.get(t, c) != c:
            raise ConsistencyError(f"triple {t} assigned to cliques {self.tri[t]} and {c}")
        self.lab.clique_triples[c] = t
        self.tri[t] = c

    def set_pairset(self, p: int, pair) -> None:
        t = tuple(sorted(pair))
        old = tuple(self.lab.pairset_pairs[p].tolist())
        if old[0] and old != t:
            raise ConsistencyError(f"pair-set {p} labelled both {old} and {t}")
        if self.pair.get(t, p) != p:
            raise ConsistencyError(f"pair {t} assigned to pair-sets {self.pair[t]} and {p}")
        self.lab.pairset_pairs[p] = t
        self.pair[t] = p

    def S(self, *pair: int) -> int:
        t = tuple(sorted(pair))
        if t not in self.pair:
            raise ConsistencyError(f"pair-set {t} needed before it was labelled")
        return self.pair[t]

    def C(self, *triple: int) -> int:
        return self.tri[tuple(sorted(triple))]

    def intersect(self, s1: int, s2: int) -> int:
        key = (s1, s2) if s1 < s2 else (s2, s1)
        if s1 == s2 or key not in self.meet:
            raise AmbiguousIntersection(f"pair-sets {s1} and {s2} do not meet in exactly one clique")
        return self.meet[key]

    def third(self, c: int, *known: int) -> int:
        rest = [p for p in self.cp[c].tolist() if p not in known]
        if len(rest) != 1:
            raise AmbiguousIntersection(f"clique {c}: cannot single out its third pair-set")
        return rest[0]

    def common(self, c1: int, c2: int) -> int:
        both = set(self.cp[c1].tolist()) & set(self.cp[c2].tolist())
        if len(both) != 1:
            raise AmbiguousIntersection(f"cliques {c1} and {c2} share {len(both)} pair-sets, expected 1")
        return both.pop()


# --- seed and propagation -------------------------------------------------------


def seed(g: DistanceGraph, cliques: TripleCliques, pair_sets: PairSets, rng=None) -> Labeling:
    """Label one clique {1,2,3}, its members {1,2,3} ∪ t_i and its three pair-sets.

    ``rng=None`` is canonical mode: lowest-id clique, members in id order
    receive {4,5,6}, {7,8,9}, ...; pair-sets in id order receive {1,2},
    {1,3}, {2,3}.  An int or Generator randomizes each of those choices.
    """
    n = g.params.n
    lab = Labeling.empty(n, cliques.anchor, g.n_vertices, len(cliques), len(pair_sets))
    book = _Book(lab, cliques, pair_sets)
    if rng is None:
        c0 = 0
        members = sorted(cliques.members[c0].tolist())
        sets = sorted(pair_sets.clique_pairsets[c0].tolist())
    else:
        rng = np.random.default_rng(rng)
        c0 = int(rng.integers(len(cliques)))
        members = rng.permutation(cliques.members[c0]).tolist()
        sets = rng.permutation(pair_sets.clique_pairsets[c0]).tolist()
    book.set_clique(c0, (1, 2, 3))
    for p, pair in zip(sets, ((1, 2), (1, 3), (2, 3))):
        book.set_pairset(p, pair)
    nxt = 4
    for v in members:
        lab.vertex_masks[v] = _bit(1) | _bit(2) | _bit(3) | _bit(nxt) | _bit(nxt + 1) | _bit(nxt + 2)
        lab.labelled[v] = True
        nxt += 3
    if nxt != n:
        raise StructuralError(f"seed clique has {len(members)} members; expected {(n - 4) // 3}")
    lab.seed_clique = c0
    return lab


def propagate_n0(g: DistanceGraph, labeling: Labeling, cliques: TripleCliques,
                 pair_sets: PairSets) -> Labeling:
    """Label every vertex, clique and pair-set of N(u0) from a seeded labelling."""
    lab = labeling.copy()
    book = _Book(lab, cliques, pair_sets)
    n = lab.n
    top = n  # X({1,2,3}): the coordinate no seed support touches
    c0 = book.C(1, 2, 3)
    vc = cliques.vertex_cliques
    seeds = sorted(int(v) for v in cliques.members[c0])  # member order is free: ascending ids
    blocks = []
    for v in seeds:
        blk = [x for x in _labels(lab.vertex_masks[v]) if x > 3]
        blocks.append(blk)
        _propagate_seed_vertex(book, v, blk, c0, vc[v])
    inner = range(1, top)
    block_of = {x: i for i, blk in enumerate(blocks) for x in blk}

    # cliques {i,k,l} with i in {1,2,3} and k,l from different seed blocks
    for i in (1, 2, 3):
        for k, l in combinations(range(4, top), 2):
            if block_of[k] != block_of[l]:
                book.set_clique(book.intersect(book.S(i, k), book.S(i, l)), (i, k, l))
    # every pair-set on {1..n-1}
    for k, l in combinations(range(4, top), 2):
        if block_of[k] != block_of[l]:
            c = book.C(1, k, l)
            book.set_pairset(book.third(c, book.S(1, k), book.S(1, l)), (k, l))
    # every triple on {1..n-1}
    for i, j, k in combinations(inner, 3):
        if (i, j, k) not in book.tri:
            book.set_clique(book.intersect(book.S(i, j), book.S(i, k)), (i, j, k))
    # the last unlabelled clique of each S(p) is C(p ∪ {n})
    labelled = lab.clique_triples[:, 0] > 0
    for p in combinations(inner, 2):
        members = pair_sets.members[book.S(*p)]
        left = members[~labelled[members]]
        if len(left) != 1:
            raise AmbiguousIntersection(f"S{p} has {len(left)} unlabelled cliques, expected 1")
        book.set_clique(int(left[0]), (p[0], p[1], top))
    for k in inner:
        a, b = [x for x in inner if x != k][:2]
        book.set_pairset(book.common(book.C(k, a, top), book.C(k, b, top)), (k, top))
    _finish_n0(g, lab, cliques, pair_sets)
    return lab


def _propagate_seed_vertex(book: _Book, v: int, blk: list[int], c0: int, through_v: np.ndarray) -> None:
    cp = book.cp
    s12, s13, s23 = book.S(1, 2), book.S(1, 3), book.S(2, 3)
    through = set(through_v.tolist())
    cl12 = sorted(c for c in through if c != c0 and s12 in cp[c])
    if len(cl12) != 3:
        raise AmbiguousIntersection(f"vertex {v}: {len(cl12)} cliques in S{{1,2}}, expected 3")

    def on_v(c: int, what: str) -> int:
        if c not in through:
            raise ConsistencyError(f"vertex {v}: clique {what} does not pass through it")
        return c

    for k, c in zip(blk, cl12):
        book.set_clique(c, (1, 2, k))
        s1k = s2k = None
        for p in cp[c].tolist():
            if p == s12:
                continue
            key13 = (min(p, s13), max(p, s13))
            key23 = (min(p, s23), max(p, s23))
            if key13 in book.meet and key23 not in book.meet:
                s1k = p
            elif key23 in book.meet and key13 not in book.meet:
                s2k = p
        if s1k is None or s2k is None:
            raise AmbiguousIntersection(f"vertex {v}: cannot tell S{{1,{k}}} from S{{2,{k}}}")
        book.set_pairset(s1k, (1, k))
        book.set_pairset(s2k, (2, k))
        c13 = on_v(book.intersect(s1k, s13), f"{{1,3,{k}}}")
        c23 = on_v(book.intersect(s2k, s23), f"{{2,3,{k}}}")
        book.set_clique(c13, (1, 3, k))
        book.set_clique(c23, (2, 3, k))
        book.set_pairset(book.third(c13, s13, s1k), (3, k))
    for k, l in combinations(blk, 2):
        for i in (1, 2, 3):
            c = on_v(book.intersect(book.S(i, k), book.S(i, l)), f"{{{i},{k},{l}}}")
            book.set_clique(c, (i, k, l))
        book.set_pairset(book.third(book.C(1, k, l), book.S(1, k), book.S(1, l)), (k, l))
    a, b, c = blk
    book.set_clique(on_v(book.intersect(book.S(a, b), book.S(a, c)), f"{{{a},{b},{c}}}"), (a, b, c))


def _triple_masks(triples: np.ndarray) -> np.ndarray:
    t = triples.astype(np.int64) - 1
    one = np.uint64(1)
    return (one << t[:, 0].astype(np.uint64)) | (one << t[:, 1].astype(np.uint64)) | (
        one << t[:, 2].astype(np.uint64))


def _finish_n0(g: DistanceGraph, lab: Labeling, cliques: TripleCliques, ps: PairSets) -> None:
    n = lab.n
    if np.any(lab.clique_triples[:, 0] == 0):
        raise ConsistencyError("some clique left unlabelled")
    if np.any(lab.pairset_pairs[:, 0] == 0):
        raise ConsistencyError("some pair-set left unlabelled")
    tmask = _triple_masks(lab.clique_triples)
    # each clique's three pair-sets carry exactly the three pairs of its triple
    pm = _triple_masks(np.concatenate([lab.pairset_pairs, lab.pairset_pairs[:, :1]], axis=1))
    if np.any(np.bitwise_or.reduce(pm[ps.clique_pairsets], axis=1) != tmask) or np.any(popcount(pm) != 2):
        raise ConsistencyError("clique triples disagree with their pair-sets")
    vc = cliques.vertex_cliques
    verts = np.flatnonzero(vc[:, 0] >= 0)
    vm = np.bitwise_or.reduce(tmask[vc[verts]], axis=1)
    if np.any(popcount(vm) != 6):
        raise ConsistencyError("vertex cliques do not agree on a 6-set")
    seeded = lab.labelled[verts] & (np.arange(len(lab.labelled))[verts] != lab.anchor)
    if np.any(lab.vertex_masks[verts][seeded] != vm[seeded]):
        raise ConsistencyError("propagation contradicts a seed label")
    lab.vertex_masks[verts] = vm
    lab.labelled[verts] = True
    lab.vertex_masks[lab.anchor] = 0
    if lab.n_labelled != g.n_vertices:
        raise ConsistencyError("not every vertex of N(u0) was labelled")
    if len(np.unique(vm)) != len(vm):
        raise ConsistencyError("two vertices received the same support")
    lab.edges_checked = master_invariant(g, lab)
    log.info("N(u0) labelled: %d vertices, %d edges consistent", lab.n_labelled, lab.edges_checked)


def master_invariant(g: DistanceGraph, lab: Labeling) -> int:
    """Edges of g (inside the anchor's closed neighbourhood) must be exactly
    the labelled pairs whose supports meet in 3 points.  Returns #edges."""
    u0 = lab.anchor
    verts = np.flatnonzero(lab.labelled[:g.n_vertices])
    verts = verts[verts != u0]
    masks = lab.vertex_masks[verts]
    if np.any(popcount(masks) != 6):
        raise ConsistencyError("a neighbour of the anchor has a support of size != 6")
    e = verts[weight6_edges(masks)]
    e = np.sort(e, axis=1)
    ours = np.unique(e[:, 0] * g.n_vertices + e[:, 1])
    if len(ours) != len(e):
        raise ConsistencyError("two labelled supports meet in more than 3 points")
    ge = g.edges()
    inside = np.zeros(g.n_vertices, dtype=bool)
    inside[verts] = True
    keep = inside[ge[:, 0]] & inside[ge[:, 1]]
    theirs = ge[keep, 0] * g.n_vertices + ge[keep, 1]
    if not np.array_equal(ours, theirs):
        extra = np.setdiff1d(ours, theirs)
        missing = np.setdiff1d(theirs, ours)
        raise ConsistencyError(f"label adjacency mismatch: {len(extra)} non-edges predicted, "
                               f"{len(missing)} edges unexplained")
    star = g.neighbors(u0)
    if not np.array_equal(np.intersect1d(star, verts), verts):
        raise ConsistencyError("anchor is not adjacent to every labelled neighbour")
    return int(len(theirs) + len(verts))


def reconstruct_n0(g: DistanceGraph, rng=None, analysis=None) -> Labeling:
    """Blind pipeline: triple cliques -> pair-sets -> seed -> propagate."""
    if analysis is None:
        analysis = analyze_graph(g)
    tc, ps = analysis
    return propagate_n0(g, seed(g, tc, ps, rng), tc, ps)


def analyze_graph(g: DistanceGraph, u0: int | None = None) -> tuple[TripleCliques, PairSets]:
    tc = find_triple_cliques(g, u0)
    ps = build_pair_sets(g, tc, shared_vertex_relation(g, tc))
    return tc, ps


# --- shells -------------------------------------------------------------------


def extend_shell(oracle: NeighborhoodOracle, labeling: Labeling, u: int,
                 budget: int | None = None) -> Labeling:
    """Label all of N(u) for a labelled vertex u of N(u0).

    Work happens in the u-frame (supports XOR s(u)), where u plays the
    anchor.  Cliques on triples inside s(u) and those with two points in
    s(u) are pinned by already-labelled members; the rest follow from
    pair-set intersections exactly as around u0.
    """
    lab = labeling.copy()
    if not (u < len(lab.labelled) and lab.labelled[u]):
        raise ValueError(f"vertex {u} is not labelled")
    su = int(lab.vertex_masks[u])
    if su.bit_count() != 6:
        raise ValueError("extend_shell needs a vertex with a 6-point support")
    local = oracle.neighborhood(u)
    ids = local.vertices
    lab.grow(oracle.n_known)
    known = lab.labelled[ids]
    n_new = int((~known).sum())
    if budget is not None and n_new > budget:
        raise BudgetExceeded(f"N({u}) brings {n_new} new vertices, budget is {budget}")
    lg = local.graph
    uu = local.local(u)
    tc, ps = analyze_graph(lg, uu)
    frame = np.where(known, lab.vertex_masks[ids] ^ np.uint64(su), np.uint64(0))
    local_lab = Labeling.empty(lab.n, uu, lg.n_vertices, len(tc), len(ps))
    book = _Book(local_lab, tc, ps)
    U = _labels(su)
    outside = [x for x in range(1, lab.n + 1) if x not in U]
    vc = tc.vertex_cliques

    def pinned(c: int) -> tuple[int, ...]:
        mem = tc.members[c]
        fm = frame[mem][known[mem]]
        if len(fm) < 2:
            raise AmbiguousIntersection(f"shell {u}: clique {c} has {len(fm)} labelled members")
        t = int(np.bitwise_and.reduce(fm))
        if t.bit_count() != 3:
            raise ConsistencyError(f"shell {u}: labelled members of clique {c} meet in {t.bit_count()} points")
        return _labels(t)

    # cliques with at least two points in s(u): every such clique has >= 2 labelled members
    cand = np.unique(vc[known & (np.arange(lg.n_vertices) != uu)].ravel())
    for c in cand.tolist():
        t = pinned(c) if known[tc.members[c]].sum() >= 2 else None
        if t is not None and sum(x in U for x in t) >= 2:
            book.set_clique(c, t)
    for p in combinations(U, 2):
        a, b = [x for x in U if x not in p][:2]
        book.set_pairset(book.common(book.C(*p, a), book.C(*p, b)), p)
    for i in U:
        j, k = [x for x in U if x != i][:2]
        for s in outside:
            book.set_pairset(book.common(book.C(i, j, s), book.C(i, k, s)), (i, s))
    for i in U:
        for s, s2 in combinations(outside, 2):
            book.set_clique(book.intersect(book.S(i, s), book.S(i, s2)), (i, s, s2))
    i0 = U[0]
    for s, s2 in combinations(outside, 2):
        c = book.C(i0, s, s2)
        book.set_pairset(book.third(c, book.S(i0, s), book.S(i0, s2)), (s, s2))
    for s, s2, s3 in combinations(outside, 3):
        book.set_clique(book.intersect(book.S(s, s2), book.S(s, s3)), (s, s2, s3))
    if np.any(local_lab.clique_triples[:, 0] == 0) or np.any(local_lab.pairset_pairs[:, 0] == 0):
        raise ConsistencyError(f"shell {u}: structure left unlabelled")
    tmask = _triple_masks(local_lab.clique_triples)
    others = np.flatnonzero(np.arange(lg.n_vertices) != uu)
    fm = np.bitwise_or.reduce(tmask[vc[others]], axis=1)
    if np.any(popcount(fm) != 6):
        raise ConsistencyError(f"shell {u}: vertex cliques do not agree on a 6-set")
    local_lab.vertex_masks[others] = fm
    local_lab.labelled[:] = True
    if np.any(fm[known[others]] != frame[others][known[others]]):
        raise ConsistencyError(f"shell {u}: new labels contradict existing ones")
    checked = master_invariant(lg, local_lab)
    absolute = fm ^ np.uint64(su)
    lab.vertex_masks[ids[others]] = absolute
    lab.labelled[ids] = True
    lab.shells.append(int(u))
    lab.edges_checked += checked
    census = dict(zip(*np.unique(popcount(absolute[~known[others]]), return_counts=True)))
    log.info("shell %d: %d new vertices, weights %s", u, n_new,
             {int(k): int(v) for k, v in census.items()})
    return lab


# --- verification ---------------------------------------------------------------


@dataclass
class EquivalenceCertificate:
    n: int
    permutation: list[int]
    translation_support: list[int]
    scope: str
    checks: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "permutation": self.permutation,
                           "translation_support": self.translation_support, "scope": self.scope,
                           "checks": self.checks}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "EquivalenceCertificate":
        obj = json.loads(text)
        cert = cls(int(obj["n"]), [int(x) for x in obj["permutation"]],
                   [int(x) for x in obj["translation_support"]], str(obj["scope"]), dict(obj.get("checks", {})))
        cert.validate_shape()
        return cert

    def validate_shape(self) -> None:
        if sorted(self.permutation) != list(range(1, self.n + 1)):
            raise ValueError("permutation is not a bijection of 1..n")
        if any(not 1 <= x <= self.n for x in self.translation_support):
            raise ValueError("translation support out of range")

    def apply(self, masks: np.ndarray) -> np.ndarray:
        """Map label masks to reference relative masks."""
        return permute_masks(masks, [p - 1 for p in self.permutation])


def permute_masks(masks: np.ndarray, pi0) -> np.ndarray:
    """Bit i moves to bit pi0[i] (0-based) for every mask."""
    masks = np.asarray(masks, dtype=np.uint64)
    out = np.zeros_like(masks)
    one = np.uint64(1)
    for i, j in enumerate(pi0):
        out |= ((masks >> np.uint64(i)) & one) << np.uint64(j)
    return out


def _columns(masks: np.ndarray, n: int) -> list[bytes]:
    bits = ((masks[:, None] >> np.arange(n, dtype=np.uint64)) & np.uint64(1)).astype(bool)
    packed = np.packbits(bits, axis=0)
    return [packed[:, i].tobytes() for i in range(n)]


def verify(truth_source, labeling: Labeling) -> EquivalenceCertificate:
    """Match reconstructed coordinates to true ones by incidence sets."""
    n = labeling.n
    truth = unseal(truth_source)
    verts = np.flatnonzero(labeling.labelled)
    if len(verts) and verts[-1] >= len(truth):
        raise GraphError("labelling covers vertices the truth source does not know")
    rec = labeling.vertex_masks[verts]
    true = truth[verts]
    true_cols = _columns(true, n)
    index: dict[bytes, int] = {}
    for j, col in enumerate(true_cols):
        if col in index:
            raise AmbiguousMatching(f"true coordinates {index[col] + 1} and {j + 1} have identical incidence")
        index[col] = j
    pi = []
    for i, col in enumerate(_columns(rec, n)):
        if col not in index:
            raise NoPerfectMatching(f"label {i + 1} matches no true coordinate")
        pi.append(index[col])
    if len(set(pi)) != n:
        raise NoPerfectMatching("incidence matching is not a bijection")
    if not np.array_equal(permute_masks(rec, pi), true):
        raise NoPerfectMatching("permuted labels do not reproduce the truth")
    anchor_bits = unseal_anchor(truth_source)
    shells = f" + N(u) for {len(labeling.shells)} shell vertices" if labeling.shells else ""
    return EquivalenceCertificate(
        n=n,
        permutation=[p + 1 for p in pi],
        translation_support=[i + 1 for i in mask_support(anchor_bits)],
        scope=f"closed neighbourhood of anchor vertex {labeling.anchor}{shells}; {len(verts)} vertices",
        checks={"vertices_certified": int(len(verts)), "consistency_edges_checked": int(labeling.edges_checked)},
    )


def check_certificate(cert: EquivalenceCertificate, labeling: Labeling, truth_source) -> bool:
    """Independent re-check: (permutation, translation) maps every labelled
    support onto the vertex's true codeword, bit-exact."""
    cert.validate_shape()
    truth = unseal(truth_source)
    verts = np.flatnonzero(labeling.labelled)
    if cert.checks.get("vertices_certified", len(verts)) != len(verts):
        return False
    mapped = cert.apply(labeling.vertex_masks[verts])
    trans = np.uint64(sum(1 << (i - 1) for i in cert.translation_support))
    absolute = truth[verts] ^ np.uint64(unseal_anchor(truth_source))
    return bool(np.array_equal(mapped ^ trans, absolute))


# --- equivalence ----------------------------------------------------------------


def _slice(g: DistanceGraph) -> np.ndarray:
    """Absolute codewords of all vertices of an anchored graph."""
    return unseal(g) ^ np.uint64(unseal_anchor(g))


def codes_equivalent(g1: DistanceGraph, g2: DistanceGraph, rng=None,
                     align_budget: int = 200000) -> EquivalenceCertificate | None:
    """Certificate (sigma, tau) with sigma(c) + tau mapping the codewords of
    g1's slice onto those of g2's; None when either graph fails to
    reconstruct or the label spaces cannot be aligned.

    Each graph is reconstructed blind.  Two reconstructions label their
    coordinates arbitrarily, so the label spaces are aligned by a search
    that uses the two weight-6 support sets only (see ``_align``).  The
    sealed truth enters only afterwards, to turn the composed labelling
    into coordinates and check the result.
    """
    from ._align import align_words

    p1, p2 = g1.params, g2.params
    if p1 is None or p2 is None:
        raise ValueError("both graphs need code parameters")
    if (p1.t, p1.n) != (p2.t, p2.n):
        raise ValueError(f"parameter mismatch: t={p1.t} vs t={p2.t}")
    n = p1.n
    try:
        l1 = reconstruct_n0(g1, rng)
        l2 = reconstruct_n0(g2, rng)
        c1, c2 = verify(g1, l1), verify(g2, l2)
    except (StructuralError, GraphError) as exc:
        log.warning("no certificate: %s", exc)
        return None
    W1 = l1.vertex_masks[l1.labelled & (l1.vertex_masks != 0)]
    W2 = l2.vertex_masks[l2.labelled & (l2.vertex_masks != 0)]
    try:
        rho = align_words(W1, W2, n, align_budget)
    except StructuralError as exc:
        log.warning("no certificate: %s", exc)
        return None
    if rho is None:
        log.warning("no certificate: label spaces do not align")
        return None
    pi1 = np.array(c1.permutation) - 1
    pi2 = np.array(c2.permutation) - 1
    sigma = np.empty(n, dtype=np.int64)
    sigma[pi1] = pi2[rho]                     # true1 -> label1 -> label2 -> true2
    a1, a2 = unseal_anchor(g1), unseal_anchor(g2)
    tau = int(permute_masks(np.array([a1], dtype=np.uint64), sigma)[0]) ^ a2
    cert = EquivalenceCertificate(
        n=n,
        permutation=[int(x) + 1 for x in sigma],
        translation_support=[i + 1 for i in mask_support(tau)],
        scope=f"slice of code 1 around its anchor ({g1.n_vertices} words) onto code 2's ({g2.n_vertices} words)",
        checks={"words_mapped": int(g1.n_vertices),
                "consistency_edges_checked": int(l1.edges_checked + l2.edges_checked)},
    )
    if not check_equivalence(cert, g1, g2):
        log.warning("composed map fails validation")
        return None
    return cert


def check_equivalence(cert: EquivalenceCertificate, g1: DistanceGraph, g2: DistanceGraph) -> bool:
    """sigma(c) + tau maps g1's codeword slice onto g2's exactly."""
    cert.validate_shape()
    s1, s2 = _slice(g1), _slice(g2)
    if len(s1) != len(s2):
        return False
    tau = np.uint64(sum(1 << (i - 1) for i in cert.translation_support))
    mapped = cert.apply(s1) ^ tau
    return bool(np.array_equal(np.sort(mapped), np.sort(s2)))
