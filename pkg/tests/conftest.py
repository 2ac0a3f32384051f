import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from bipgenus.graph_core import BipartiteGraph, SimpleGraph, build_bipartite, build_simple

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@st.composite
def bipartite_graphs(draw, max_side=6, max_edges=None):
    n1 = draw(st.integers(1, max_side))
    n2 = draw(st.integers(1, max_side))
    pairs = list(itertools.product(range(n1), range(n2)))
    if max_edges is not None:
        chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=max_edges))
    else:
        chosen = [e for e, keep in zip(pairs, draw(st.lists(st.booleans(), min_size=len(pairs),
                                                             max_size=len(pairs)))) if keep]
    return build_bipartite(n1, n2, chosen)


@st.composite
def simple_graphs(draw, max_n=8, max_edges=None):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    if not pairs:
        return build_simple(n, [])
    cap = len(pairs) if max_edges is None else max_edges
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=cap))
    return build_simple(n, chosen)


def to_nx(g) -> nx.Graph:
    """Flat networkx copy; N2 vertex w becomes n1 + w."""
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    a, b = g.flat_edges()
    G.add_edges_from(zip(a.tolist(), b.tolist()))
    return G


def complete_bipartite(a, b) -> BipartiteGraph:
    return build_bipartite(a, b, list(itertools.product(range(a), range(b))))


def complete_graph(n) -> SimpleGraph:
    return build_simple(n, list(itertools.combinations(range(n), 2)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
