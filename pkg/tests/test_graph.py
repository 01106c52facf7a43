import networkx as nx
import numpy as np
import pytest

from prepgraph.code import Word
from prepgraph.graph import (
    DistanceGraph,
    GraphError,
    NeighborhoodOracle,
    build_n0_graph,
    check_invariants,
    export_graph,
    find_anchor,
    flip_edge,
    import_graph,
    relabel,
    scramble,
    scramble_permutation,
    unseal,
    unseal_anchor,
)


def test_sizes_t3(g3, full3):
    assert (g3.n_vertices, g3.n_edges) == (113, 3472)
    assert set(g3.degrees()[1:].tolist()) == {61}
    assert (full3.n_vertices, full3.n_edges) == (256, 14336)
    assert set(full3.degrees().tolist()) == {112}
    check_invariants(g3)
    check_invariants(full3)


def test_sizes_t5(g5):
    assert g5.n_vertices == 41665
    assert g5.n_edges == 7957824
    deg = g5.degrees()
    a = find_anchor(g5)
    assert deg[a] == 41664
    assert set(np.delete(deg, a).tolist()) == {381}


def test_edges_are_distance6(full3):
    truth = unseal(full3)
    e = full3.edges()
    assert np.all(np.bitwise_count(truth[e[:, 0]] ^ truth[e[:, 1]]) == 6)


def test_n0_around_other_anchor(p3, full3):
    truth = unseal(full3)
    v = int(np.flatnonzero(np.bitwise_count(truth) == 8)[0])
    g = build_n0_graph(p3, Word(int(truth[v]), 16))
    assert unseal_anchor(g) == int(truth[v])
    nb = np.r_[v, full3.neighbors(v)]
    absolute = unseal(g) ^ np.uint64(unseal_anchor(g))
    assert np.array_equal(np.sort(absolute), np.sort(truth[nb]))
    # same graph: map vertices through their codewords
    pos = {int(w): i for i, w in enumerate(truth[nb])}
    perm = np.array([pos[int(w)] for w in absolute])
    assert relabel(g, perm).same_adjacency(full3.induced(nb))


def test_public_api_hides_supports(g3):
    public = [a for a in dir(g3) if not a.startswith("_")]
    assert set(public) == {"edges", "from_edges", "has_edge", "has_truth", "degree", "degrees",
                           "indices", "indptr", "induced", "n_edges", "n_vertices", "neighbors",
                           "params", "same_adjacency"}
    assert "masks" not in repr(g3._sealed) and "0x" not in repr(g3._sealed)
    assert g3.has_truth
    with pytest.raises(GraphError):
        unseal(DistanceGraph.from_edges(3, np.array([[0, 1]])))


def test_scramble_is_relabelling(g3):
    s = scramble(g3, 7)
    perm = scramble_permutation(g3.n_vertices, 7)
    assert s.n_edges == g3.n_edges
    assert np.array_equal(unseal(s)[perm], unseal(g3))
    assert find_anchor(s) == perm[0]
    assert s.same_adjacency(relabel(g3, perm))
    assert scramble(g3, 7).same_adjacency(s)


def test_find_anchor_rejects(full3):
    with pytest.raises(GraphError):
        find_anchor(full3)


@pytest.mark.parametrize("fmt", ["graph6", "dot", "json", "bin"])
def test_format_roundtrip(fmt, g3, full3):
    for g in (g3, scramble(full3, 2)):
        h = import_graph(export_graph(g, fmt), fmt)
        assert h.same_adjacency(g)
        assert not h.has_truth


def test_graph6_matches_networkx(g3):
    G = nx.Graph()
    G.add_nodes_from(range(g3.n_vertices))
    G.add_edges_from(g3.edges().tolist())
    assert export_graph(g3, "graph6") == nx.to_graph6_bytes(G)
    H = nx.from_graph6_bytes(export_graph(g3, "graph6").strip().removeprefix(b">>graph6<<"))
    assert H.number_of_edges() == g3.n_edges


def test_graph6_edge_cases():
    empty = DistanceGraph.from_edges(0, np.zeros((0, 2), dtype=np.int64))
    assert export_graph(empty, "graph6") == b">>graph6<<?\n"
    assert import_graph(b">>graph6<<?\n", "graph6").n_vertices == 0
    for bad in (b"", b"A\x01", b"Bw_\n"):
        with pytest.raises(GraphError):
            import_graph(bad, "graph6")


def test_malformed_inputs():
    with pytest.raises(GraphError):
        import_graph(b"PREPGRX", "bin")
    with pytest.raises(GraphError):
        import_graph(b"not json", "json")
    with pytest.raises(GraphError):
        export_graph(DistanceGraph.from_edges(2, np.array([[0, 1]])), "gml")


def test_dot_size_cap(g5):
    with pytest.raises(GraphError):
        export_graph(g5, "dot")


def test_flip_edge(g3):
    u, v = map(int, g3.edges()[5])
    h = flip_edge(g3, u, v)
    assert h.n_edges == g3.n_edges - 1 and not h.has_edge(u, v)
    assert flip_edge(h, u, v).same_adjacency(g3)
    with pytest.raises(GraphError):
        flip_edge(g3, 1, 1)


def test_neighborhood_oracle(g3):
    orc = NeighborhoodOracle(scramble(g3, 3), seed=0)
    truth_before = orc.n_known
    local = orc.neighborhood(5)
    g = local.graph
    assert g.n_vertices == 113
    assert g.degree(local.local(5)) == 112
    # codewords: the local truth is s(5)'s neighbours
    t = unseal(orc)
    own = t[local.vertices]
    centre = t[5]
    others = np.delete(own, local.local(5))
    assert np.all(np.bitwise_count(others ^ centre) == 6)
    assert orc.n_known > truth_before
    # repeated calls are stable
    assert np.array_equal(orc.neighborhood(5).vertices, local.vertices)
