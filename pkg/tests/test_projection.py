import math

import numpy as np
from hypothesis import given

from bipgenus.graph_core import build_bipartite
from bipgenus.planarity import is_planar
from bipgenus.projection import two_centre
from bipgenus.sampler import SeedSpec, sample_binomial_graph, sample_bipartite
from conftest import bipartite_graphs


def test_single_two_path():
    rep = two_centre(build_bipartite(2, 1, [(0, 0), (1, 0)]))
    assert rep.h.edge_set() == {(0, 1)}
    assert rep.z_count == 0 and rep.multiplicity_histogram == {1: 1}


def test_degree_three_centre_is_dropped():
    rep = two_centre(build_bipartite(3, 1, [(0, 0), (1, 0), (2, 0)]))
    assert rep.h.n == 3 and rep.h.m == 0
    assert rep.z_count == 3 and rep.v2_count == 1


def test_parallel_two_paths_collapse():
    rep = two_centre(build_bipartite(2, 2, [(0, 0), (1, 0), (0, 1), (1, 1)]))
    assert rep.h.edge_set() == {(0, 1)}
    assert rep.multiplicity_histogram == {2: 1}
    assert rep.h3.m == 2 and rep.h3.multiplicity.tolist() == [2]


@given(bipartite_graphs(max_side=7))
def test_projection_matches_definition(g):
    rep = two_centre(g)
    deg = g.deg2
    expect = set()
    for w in range(g.n2):
        if deg[w] == 2:
            x, y = sorted(g.neighbors_n2(w).tolist())
            expect.add((x, y))
    assert rep.h.n == g.n1
    assert rep.h.edge_set() == expect
    assert rep.h.multiplicity is None
    assert rep.z_count == int(deg[deg >= 3].sum())
    assert rep.v1_count == int((deg <= 1).sum())
    assert rep.v2_count == int((deg >= 3).sum())
    assert sum(k * c for k, c in rep.multiplicity_histogram.items()) == int((deg == 2).sum())
    assert sum(rep.multiplicity_histogram.values()) == rep.h.m


@given(bipartite_graphs(max_side=6))
def test_planar_graph_has_planar_projection(g):
    # the 2-centre is a minor of G
    if is_planar(g):
        assert is_planar(two_centre(g).h)


def test_edge_marginal_large_n2():
    n1, n2, p = 40, 100_000, 0.0005
    q = p * p * n2
    hits = [two_centre(sample_bipartite(n1, n2, p, SeedSpec(404, i))).h.m for i in range(200)]
    freq = np.mean(hits) / math.comb(n1, 2)
    assert 0.9 * q <= freq <= 1.1 * q


def _stats(g):
    deg = g.degrees
    a = np.zeros((g.n, g.n), dtype=np.int64)
    a[g.a, g.b] = a[g.b, g.a] = 1
    tri = int(np.trace(a @ a @ a) // 6)
    return g.m, int(deg.max()), tri


def test_projection_sits_between_binomial_graphs():
    n1, n2, p, delta, trials = 40, 40_000, 0.001, 0.1, 300
    q = p * p * n2
    h = np.array([_stats(two_centre(sample_bipartite(n1, n2, p, SeedSpec(5, i))).h) for i in range(trials)])
    lo = np.array([_stats(sample_binomial_graph(n1, (1 - delta) * q, SeedSpec(5, i, 1))) for i in range(trials)])
    hi = np.array([_stats(sample_binomial_graph(n1, (1 + delta) * q, SeedSpec(5, i, 2))) for i in range(trials)])
    se = lambda x: x.std(axis=0, ddof=1) / math.sqrt(trials)  # noqa: E731
    mh, ml, mu_ = h.mean(axis=0), lo.mean(axis=0), hi.mean(axis=0)
    assert np.all(mh >= ml - 3 * np.hypot(se(h), se(lo)))
    assert np.all(mh <= mu_ + 3 * np.hypot(se(h), se(hi)))


def test_z_first_moment():
    n1, n2, p = 100, 50_000, 0.0004
    z = [two_centre(sample_bipartite(n1, n2, p, SeedSpec(6, i))).z_count for i in range(100)]
    assert np.mean(z) <= 1.1 * p**3 * n1**3 * n2


def test_h3_multiplicities_count_two_paths():
    g = build_bipartite(3, 5, [(0, 0), (1, 0), (0, 1), (1, 1), (1, 2), (2, 2), (0, 3), (1, 3), (2, 3), (0, 4)])
    rep = two_centre(g)
    assert rep.h3.edge_set() == {(0, 1), (1, 2)}
    assert dict(zip(map(tuple, rep.h3.edges.tolist()), rep.h3.multiplicity.tolist())) == {(0, 1): 2, (1, 2): 1}
    assert rep.multiplicity_histogram == {1: 1, 2: 1}
    assert (rep.v1_count, rep.v2_count, rep.z_count) == (1, 1, 3)
    assert rep.to_dict()["multiplicity_histogram"] == {"1": 1, "2": 1}
