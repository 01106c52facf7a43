from itertools import combinations

import numpy as np
import pytest

from prepgraph import oracle
from prepgraph.cliques import (
    RelationKind,
    blocks_as_coordinates,
    blocks_from_graph,
    clique_pair_profile,
    find_triple_cliques,
    hidden_triples,
    shared_vertex_relation,
)
from prepgraph.enumeration import cover_codeword, sqs_blocks
from prepgraph.graph import find_anchor, unseal


@pytest.fixture(scope="module")
def triples(g5, analysis5):
    tc, _ = analysis5
    tri = hidden_triples(g5, tc)
    index = {tuple(r): i for i, r in enumerate(tri.tolist())}
    return tri, index


def test_triple_clique_counts(g5, analysis5):
    tc, _ = analysis5
    a = find_anchor(g5)
    assert len(tc) == 41664 and tc.size == 20
    counts = np.bincount(tc.members.ravel(), minlength=g5.n_vertices)
    assert counts[a] == 0
    assert set(np.delete(counts, a).tolist()) == {20}
    # every inner edge in exactly one clique
    i, j = np.triu_indices(20, 1)
    u = np.minimum(tc.members[:, i], tc.members[:, j]).ravel().astype(np.int64)
    v = np.maximum(tc.members[:, i], tc.members[:, j]).ravel().astype(np.int64)
    keys = np.unique(u * g5.n_vertices + v)
    assert len(keys) == len(u) == g5.n_edges - (g5.n_vertices - 1)
    e = g5.edges()
    inner = e[(e[:, 0] != a) & (e[:, 1] != a)].astype(np.int64)
    assert np.array_equal(keys, np.sort(inner[:, 0] * g5.n_vertices + inner[:, 1]))


def test_cliques_are_triple_sets(g5, triples):
    tri, _ = triples
    assert len({tuple(r) for r in tri.tolist()}) == 41664 == len(list(combinations(range(64), 3)))


def test_t3_rejected(g3):
    with pytest.raises(ValueError, match="13"):
        find_triple_cliques(g3)


def test_pair_profile_trichotomy(p5, g5, analysis5, triples):
    tc, _ = analysis5
    tri, index = triples
    truth = unseal(g5)
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(400):
        i, j, k, x = (int(v) for v in rng.choice(64, 4, replace=False))
        t1, t2 = tuple(sorted((i, j, k))), tuple(sorted((i, j, x)))
        rel = clique_pair_profile(g5, tc[index[t1]], tc[index[t2]])
        cover = cover_codeword((i, j, k, x), p5)
        if cover is None:
            assert rel.kind is RelationKind.BLOCK_PARTNER
        else:
            assert rel.kind is RelationKind.SHARED_VERTEX
            assert int(truth[rel.shared]) == cover.bits
        # triples sharing at most one point
        y = [int(v) for v in rng.choice([z for z in range(64) if z not in (i, j, k)], 2, replace=False)]
        t3 = tuple(sorted((i, *y)))
        if len(set(t3) & set(t1)) <= 1:
            assert clique_pair_profile(g5, tc[index[t1]], tc[index[t3]]).kind is RelationKind.UNRELATED
            checked += 1
        checked += 1
    assert checked >= 600
    with pytest.raises(ValueError):
        clique_pair_profile(g5, tc[0], tc[0])


def test_pair_sets_and_blocks(p5, g5, analysis5, triples):
    tc, ps = analysis5
    tri, _ = triples
    assert len(ps) == 2016 and ps.members.shape[1] == 62
    for row in ps.members[::50]:
        common = set(tri[row[0]].tolist())
        for c in row:
            common &= set(tri[c].tolist())
        assert len(common) == 2
    assert len(ps.block_partners()) == 62496
    blocks = blocks_from_graph(g5, tc, ps)
    assert len(blocks) == 10416
    sq = sqs_blocks(p5)
    assert np.array_equal(blocks_as_coordinates(g5, tc, blocks), sq[np.lexsort(sq.T[::-1])])


def test_shared_vertex_relation_size(g5, analysis5):
    tc, _ = analysis5
    svp = shared_vertex_relation(g5, tc)
    # a triple shares a pair with 3 * 61 others; 3 of those close a block
    assert svp.n_pairs == 3749760 == 41664 * (3 * 61 - 3) // 2


def test_naive_cliques_in_neighbourhoods(g5, analysis5):
    tc, _ = analysis5
    a = find_anchor(g5)
    vc = tc.vertex_cliques
    for v in (3, 1000, 20000):
        if v == a:
            continue
        nb = np.r_[v, g5.neighbors(v)]
        cl = oracle.naive_maximal_cliques(g5, nb)
        big = sorted(tuple(sorted(set(c) - {a})) for c in cl if len(c) >= 14)
        want = sorted(tuple(sorted(tc.members[c].tolist())) for c in vc[v])
        assert big == want
        assert max(len(c) for c in cl if len(c) < 14) <= 13
