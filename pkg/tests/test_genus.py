import itertools
import random

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bipgenus.genus import exact_genus_small, face_upper_bound, genus_interval, rotation_system_count
from bipgenus.graph_core import build_bipartite, build_simple, component_table
from bipgenus.planarity import is_planar
from bipgenus.projection import two_centre
from bipgenus.structure import WorkLimitExceeded
from conftest import bipartite_graphs, complete_bipartite, complete_graph


def random_small_graph(rng: random.Random, max_edges=12):
    if rng.random() < 0.5:
        n1, n2 = rng.randint(2, 6), rng.randint(2, 6)
        pairs = list(itertools.product(range(n1), range(n2)))
        return build_bipartite(n1, n2, rng.sample(pairs, rng.randint(0, min(max_edges, len(pairs)))))
    n = rng.randint(3, 8)
    pairs = list(itertools.combinations(range(n), 2))
    return build_simple(n, rng.sample(pairs, rng.randint(0, min(max_edges, len(pairs)))))


def test_face_bound_tree_and_cycle():
    tree = build_bipartite(3, 2, [(0, 0), (1, 0), (1, 1), (2, 1)])
    assert face_upper_bound(tree, 2) == 1
    assert face_upper_bound(complete_bipartite(2, 2), 2) == 2


def test_face_bound_k33_is_capped():
    # 2 * 9 + floor(18 / 3) = 24 before the cap floor(9 / 2) = 4
    assert face_upper_bound(complete_bipartite(3, 3), 2) == 4


def test_interval_examples():
    forest = build_bipartite(3, 3, [(0, 0), (1, 0), (2, 2)])
    gi = genus_interval(forest)
    assert (gi.lower, gi.upper) == (0, 0)

    gi = genus_interval(complete_bipartite(3, 3))
    assert (gi.lower, gi.upper) == (1, 2)
    assert gi.face_upper_bound == 4 and gi.j_star == 2

    k22_k11 = build_bipartite(3, 3, [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)])
    gi = genus_interval(k22_k11)
    assert (gi.lower, gi.upper) == (0, 0)


def test_empty_j_range_uses_cap_only():
    gi = genus_interval(complete_bipartite(3, 3), j_range=())
    assert gi.j_star is None and gi.face_upper_bound == 4 and gi.lower == 1
    with pytest.raises(ValueError):
        genus_interval(complete_bipartite(3, 3), j_range=(1,))


@pytest.mark.parametrize("g, genus", [
    (complete_bipartite(3, 3), 1),
    (complete_graph(4), 0),
    (complete_bipartite(4, 4), 1),
    (complete_bipartite(3, 4), 1),
    (complete_graph(5), 1),
    (build_simple(10, list(nx.petersen_graph().edges())), 1),
])
def test_exact_genus_known_values(g, genus):
    assert exact_genus_small(g) == genus


def test_k33_has_64_rotation_systems():
    assert rotation_system_count(complete_bipartite(3, 3)) == 64


def test_exact_genus_is_additive():
    # two disjoint copies of K_{3,3}
    edges = [(x, y) for x in range(3) for y in range(3)] + [(x + 3, y + 3) for x in range(3) for y in range(3)]
    assert exact_genus_small(build_bipartite(6, 6, edges)) == 2


def test_exact_genus_ceiling():
    with pytest.raises(WorkLimitExceeded):
        exact_genus_small(complete_bipartite(4, 5))
    with pytest.raises(WorkLimitExceeded):
        exact_genus_small(complete_bipartite(3, 3), max_states=10)


def test_sandwich_and_planarity_on_random_small_graphs():
    rng = random.Random(2718)
    for _ in range(1200):
        g = random_small_graph(rng)
        gi = genus_interval(g)
        exact = exact_genus_small(g)
        assert gi.lower <= exact <= gi.upper
        assert is_planar(g) == (exact == 0)


@given(bipartite_graphs(max_side=6, max_edges=14))
def test_interval_invariants(g):
    gi = genus_interval(g)
    t = component_table(g)
    assert 0 <= gi.lower <= gi.upper
    assert gi.upper == int((t.excess // 2).sum())
    assert gi.point_estimate == (g.m - g.n + t.kappa) / 2


@given(bipartite_graphs(max_side=6), st.data())
def test_adding_an_edge_moves_upper_by_at_most_one(g, data):
    absent = [(x, w) for x in range(g.n1) for w in range(g.n2) if (x, w) not in g.edge_set()]
    if not absent:
        return
    e = data.draw(st.sampled_from(absent))
    bigger = build_bipartite(g.n1, g.n2, sorted(g.edge_set()) + [e])
    diff = genus_interval(bigger, ()).upper - genus_interval(g, ()).upper
    assert diff in (0, 1)


def test_two_centre_sandwich_exact():
    rng = random.Random(99)
    checked = 0
    while checked < 300:
        n1, n2 = rng.randint(3, 6), rng.randint(3, 10)
        pairs = list(itertools.product(range(n1), range(n2)))
        g = build_bipartite(n1, n2, rng.sample(pairs, rng.randint(3, min(14, len(pairs)))))
        try:
            gg = exact_genus_small(g, max_states=200_000)
        except WorkLimitExceeded:
            continue
        rep = two_centre(g)
        gh = exact_genus_small(rep.h)
        assert gh <= gg <= gh + rep.z_count
        checked += 1
