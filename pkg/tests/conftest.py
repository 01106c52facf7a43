from __future__ import annotations

import pytest

from prepgraph.code import CodeParams
from prepgraph.graph import build_full_graph, build_n0_graph, scramble


@pytest.fixture(scope="session")
def p3():
    return CodeParams.from_t(3)


@pytest.fixture(scope="session")
def p5():
    return CodeParams.from_t(5)


@pytest.fixture(scope="session")
def g3(p3):
    return build_n0_graph(p3)


@pytest.fixture(scope="session")
def full3(p3):
    return build_full_graph(p3)


@pytest.fixture(scope="session")
def g5(p5):
    """Scrambled t=5 neighbourhood graph (41665 vertices)."""
    return scramble(build_n0_graph(p5), 1)


@pytest.fixture(scope="session")
def analysis5(g5):
    from prepgraph.reconstruct import analyze_graph

    return analyze_graph(g5)


@pytest.fixture(scope="session")
def labeling5(g5, analysis5):
    from prepgraph.reconstruct import propagate_n0, seed

    tc, ps = analysis5
    return propagate_n0(g5, seed(g5, tc, ps), tc, ps)
