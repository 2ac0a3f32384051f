import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bipgenus.graph_core import build_bipartite, component_table
from bipgenus.theory import (
    expected_tree_components_exact,
    gamma_const,
    mu,
    nu,
    nu_closed_form,
    nu_ratio_bound,
    spanning_tree_count,
    tree_series,
    zeta,
)

GRID_D = [0.3, 0.5, 0.7, 0.9]
GRID_LAM = [0.25, 0.5, 1.0]


@pytest.mark.parametrize("d", [0.2, 0.5, 0.9, 1.0])
def test_tree_series_identity_below_one(d):
    r = tree_series(d * math.exp(-d), 1e-13)
    assert abs(r.value - (d - d * d / 2)) <= max(r.tail_bound, 1e-13) + 1e-15


def test_mu_examples():
    assert 0.45 < mu(20, 1e-10).value < 0.5
    r = mu(0.9, 1e-12)
    assert abs(r.value) <= 1e-8 and r.converged
    assert mu(1.0001, 1e-8).value <= 0.01


def test_mu_monotone_on_grid():
    rs = [mu(d, 1e-12) for d in np.arange(1.1, 10.0001, 0.1)]
    for a, b in zip(rs, rs[1:]):
        assert b.value >= a.value - 2 * (a.tail_bound + b.tail_bound)


def test_mu_at_one_is_unconverged():
    r = mu(1.0, 1e-12, max_terms=20_000)
    assert not r.converged and r.tail_bound > 1e-12
    assert abs(r.value) < 1e-3


def test_nu_examples():
    assert abs(nu(0.5, 1.0, 1e-10).value - 1.5) <= 1e-8
    assert abs(nu(0.9, 0.25, 1e-10).value - 3.2) <= 1e-6
    assert nu(2, 1.0, 1e-10).value <= 2


@pytest.mark.parametrize("d, lam", list(itertools.product(GRID_D, GRID_LAM)))
def test_nu_matches_closed_form_below_one(d, lam):
    r = nu(d, lam, 1e-10)
    assert r.converged
    assert abs(r.value - nu_closed_form(d, lam)) <= 1e-6


@pytest.mark.parametrize("d", [0.5, 2.0, 3.0, 6.0])
def test_nu_symmetric_case_reduces_to_tree_series(d):
    # with lambda = 1 the double sum collapses to 2 k^(k-2) / k! per k
    lhs = nu(d, 1.0, 1e-12).value
    rhs = 2 / d * tree_series(d * math.exp(-d), 1e-14).value
    assert abs(lhs - rhs) <= 1e-10


def test_nu_bounded_by_two_over_lambda():
    for d in (1.5, 2, 4):
        for lam in (0.3, 0.6, 1.0):
            assert nu(d, lam, 1e-8).value <= 2 / lam


def test_ratio_bound_at_most_one():
    for d in (0.3, 1.0, 1.7, 4.0):
        for lam in (0.1, 0.5, 1.0):
            assert nu_ratio_bound(d, lam) <= 1 + 1e-8


def test_nu_near_one_reports_non_convergence():
    r = nu(1.0, 0.5, 1e-10)
    assert not r.converged and r.tail_bound > 1e-10 and math.isfinite(r.value)


@settings(max_examples=15)
@given(st.floats(1.5, 6.0), st.floats(0.3, 1.0))
def test_tail_bound_is_honest(d, lam):
    coarse = nu(d, lam, 1e-3)
    fine = nu(d, lam, 1e-12)
    assert coarse.tail_bound >= 0 and coarse.converged == (coarse.tail_bound <= 1e-3)
    assert abs(fine.value - coarse.value) <= coarse.tail_bound + fine.tail_bound + 1e-13


def test_gamma_closed_form_cancels():
    r = gamma_const(0.99, 0.5, closed_form=True)
    assert abs(r.value) <= 1e-10


def test_gamma_symmetric_case():
    assert gamma_const(2, 1.0, 1e-12).value == pytest.approx(nu(2, 1.0, 1e-12).value / 4, abs=1e-15)
    for d in (20, 25, 40):
        assert abs(gamma_const(d, 1.0).value - (0.5 - 1 / d)) <= 0.03


def test_gamma_tail_scales_with_nu():
    g = gamma_const(3, 0.5, 1e-9)
    n = nu(3, 0.5, 1e-9 / (math.sqrt(0.5) / 6))
    assert g.tail_bound == pytest.approx(n.tail_bound * math.sqrt(0.5) / 6)


def test_zeta_monotone_and_bounded():
    for d, lam in [(2.0, 1.0), (1.5, 0.5), (3.0, 0.25)]:
        vals = [zeta(d, n1, lam).value for n1 in (10, 30, 100, 300, 1000, 3000)]
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
        assert vals[-1] <= 2 / lam
        assert vals[-1] <= nu(d, lam, 1e-12).value + 1e-12


def brute_tree_components(n1, n2, p, kmax):
    pairs = list(itertools.product(range(n1), range(n2)))
    total = 0.0
    for mask in range(1 << len(pairs)):
        edges = [pr for i, pr in enumerate(pairs) if mask >> i & 1]
        weight = p ** len(edges) * (1 - p) ** (len(pairs) - len(edges))
        t = component_table(build_bipartite(n1, n2, edges))
        total += weight * int(((t.excess == 0) & (t.order <= kmax)).sum())
    return total


def test_tree_expectation_small_examples():
    assert expected_tree_components_exact(1, 1, 0.5, 2) == pytest.approx(1.5, abs=1e-15)
    assert expected_tree_components_exact(7, 7, 0.0, 3) == pytest.approx(14, rel=1e-12)
    assert expected_tree_components_exact(1, 3, 1.0, 4) == pytest.approx(1, rel=1e-12)
    assert expected_tree_components_exact(2, 2, 1.0, 4) == 0


@pytest.mark.parametrize("n1, n2", [(a, b) for a in range(1, 4) for b in range(1, 4)])
def test_tree_expectation_matches_enumeration(n1, n2):
    for p in np.round(np.arange(0.1, 1.0, 0.1), 1):
        for kmax in sorted({1, 2, n1 + n2}):
            exact = expected_tree_components_exact(n1, n2, float(p), kmax)
            brute = brute_tree_components(n1, n2, float(p), kmax)
            assert abs(exact - brute) <= 1e-12 * brute


def test_tree_expectation_validation():
    with pytest.raises(ValueError):
        expected_tree_components_exact(2, 2, 0.5, 5)
    with pytest.raises(ValueError):
        expected_tree_components_exact(2, 2, 1.5, 2)


def matrix_tree(a, b):
    n = a + b
    L = np.zeros((n, n))
    for x in range(a):
        for y in range(a, n):
            L[x, y] = L[y, x] = -1
    np.fill_diagonal(L, -L.sum(axis=1))
    return int(round(np.linalg.det(L[1:, 1:])))


def test_spanning_tree_examples():
    assert spanning_tree_count(2, 2) == 4
    assert spanning_tree_count(1, 1) == 1
    assert spanning_tree_count(2, 3) == 12


@pytest.mark.parametrize("a, b", [(a, b) for a in range(1, 6) for b in range(1, 6)])
def test_spanning_trees_match_matrix_tree(a, b):
    assert spanning_tree_count(a, b) == matrix_tree(a, b)


def test_spanning_tree_overflow_and_domain():
    assert spanning_tree_count(10, 10) == 10**18
    with pytest.raises(OverflowError):
        spanning_tree_count(40, 40)
    with pytest.raises(ValueError):
        spanning_tree_count(0, 3)
