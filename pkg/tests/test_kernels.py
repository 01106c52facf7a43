import numpy as np
import pytest

from prepgraph import kernels
from prepgraph.cliques import find_triple_cliques
from prepgraph.graph import build_n0_graph

needs_ext = pytest.mark.skipif("compiled" not in kernels.available(), reason="extension not built")


def test_backend_switch():
    before = kernels.backend_name()
    kernels.set_backend("python")
    assert kernels.backend_name() == "python"
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")
    kernels.set_backend(before)


def _both(fn):
    return fn(kernels.backend("compiled")), fn(kernels.backend("python"))


def _equal(a, b):
    if isinstance(a, tuple):
        return all(_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


@needs_ext
@pytest.mark.parametrize("base", [0, 12345])
def test_scan_parity(p5, base):
    key = base % len(p5.valid_preparata)
    c, p = _both(lambda k: k.scan_w6(p5.keys, p5.valid_preparata, key, 0, 20))
    assert _equal(c, p)


@needs_ext
def test_triple_clique_parity_on_local_graph(g5):
    # closed neighbourhood of one vertex, its centre excluded
    v = 7
    nb = np.r_[v, g5.neighbors(v)]
    h = g5.induced(nb)
    c, p = _both(lambda k: k.triple_cliques(h.indptr, h.indices, 0, 14, 20))
    assert _equal(c, p)


@needs_ext
def test_triple_clique_parity_t3(g3):
    c, p = _both(lambda k: k.triple_cliques(g3.indptr, g3.indices, 0, 4, 4))
    assert _equal(c, p)


@needs_ext
def test_cross_count_parity(g5, analysis5):
    tc, _ = analysis5
    rng = np.random.default_rng(1)
    pick = rng.integers(len(tc), size=(300, 2))
    A = tc.members[pick[:, 0]].astype(np.int32)
    B = tc.members[pick[:, 1]].astype(np.int32)
    c, p = _both(lambda k: k.cross_counts(g5.indptr, g5.indices, A, B))
    assert _equal(c, p)


def test_python_backend_end_to_end(p3):
    # the fallback alone reproduces the t=3 enumeration
    from prepgraph.enumeration import scan_distance6

    before = kernels.backend_name()
    try:
        kernels.set_backend("python")
        assert len(scan_distance6(p3)) == 112
    finally:
        kernels.set_backend(before)


def test_triple_cliques_via_python_backend_small(p5):
    # full t=5 run on the fallback takes ~30 s; compare on a handful of local graphs instead
    g = build_n0_graph(p5)
    before = kernels.backend_name()
    try:
        kernels.set_backend("python")
        for v in (1, 2):
            nb = np.r_[v, g.neighbors(v)]
            h = g.induced(nb)
            mem, prob = kernels.backend().triple_cliques(h.indptr, h.indices, 0, 14, 20)
            assert len(mem) > 0
    finally:
        kernels.set_backend(before)
    assert len(find_triple_cliques(g)) == 41664
