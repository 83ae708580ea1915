import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from approxgi.graph_core import (
    Graph,
    Permutation,
    apply_permutation,
    defect_profile,
    gen_gnp,
    gen_no_instance,
    gen_yes_instance,
    make_rng,
    num_pairs,
)
from approxgi.product_walk import (
    ProductVertex,
    chain_spectrum,
    internal_degrees,
    matching_density,
    matching_indices,
    matching_set,
    overlap_property_check,
    product_adjacency,
    product_adjacent,
    transition_matrix,
    transition_prob,
    verify_detailed_balance,
)

from conftest import random_graph_pair


def test_product_adjacent_examples():
    k3, e3 = Graph.complete(3), Graph.empty(3)
    assert not product_adjacent((0, 0), (0, 1), k3, k3)
    assert product_adjacent((0, 0), (1, 1), k3, k3)
    assert not product_adjacent((0, 0), (1, 1), k3, e3)
    assert product_adjacent((0, 0), (1, 1), e3, e3)


def test_transition_rows_sum_to_one_exactly():
    g, h = random_graph_pair(6, 0)
    n = 6
    for i in range(n):
        for j in range(n):
            row = sum(transition_prob((i, j), (a, b), g, h) for a in range(n) for b in range(n))
            assert row == Fraction(1)
            assert transition_prob((i, j), (i, j), g, h) >= Fraction(1, 2)


def test_complete_pair_off_diagonal_value():
    n = 5
    k = Graph.complete(n)
    for y in [(1, 2), (3, 4), (4, 1)]:
        assert transition_prob((0, 0), y, k, k) == Fraction(1, 2 * (n - 1) ** 2)
    assert transition_prob((0, 0), (0, 3), k, k) == 0


@pytest.mark.parametrize("n", [4, 6, 8])
def test_detailed_balance(n):
    for s in range(10 if n == 8 else 3):
        g, h = random_graph_pair(n, s)
        assert verify_detailed_balance(g, h) == 0.0
    k4 = Graph.complete(4)
    assert verify_detailed_balance(k4, k4) == 0.0


@pytest.mark.parametrize("n", [5, 9, 12])
def test_chain_is_doubly_stochastic(n):
    g, h = random_graph_pair(n, n)
    p = transition_matrix(g, h)
    assert np.allclose(p.sum(axis=0), 1, atol=1e-12)
    assert np.allclose(p.sum(axis=1), 1, atol=1e-12)


def test_chain_spectrum_basic_shape():
    g, h = random_graph_pair(5, 3)
    cs = chain_spectrum(g, h)
    assert cs.eigenvalues.min() >= -1e-12
    assert abs(cs.eigenvalues.max() - 1) <= 1e-9
    p = transition_matrix(g, h)
    u = np.full(25, 1 / 5)
    assert np.allclose(p @ u, u)
    assert cs.to_csv().splitlines()[0] == "index,eigenvalue"


def test_spectral_gap_distribution_at_12():
    """Gaps of the lazy product chain on G(12,1/2) pairs.

    The chain stays put with probability close to 3/4, which keeps the gap
    near 0.17 at this size; a 0.2 bar is not met by most pairs.
    """
    gaps = np.array([chain_spectrum(*random_graph_pair(12, s)).spectral_gap for s in range(20)])
    assert np.all(gaps > 0.05)
    assert 0.12 <= np.median(gaps) <= 0.22


@pytest.mark.xfail(strict=True, reason="measured gaps sit near 0.17 at n=12; a 0.2 bar for 95% of pairs does not hold")
def test_spectral_gap_at_least_02_at_12():
    gaps = [chain_spectrum(*random_graph_pair(12, s)).spectral_gap for s in range(20)]
    assert np.mean(np.array(gaps) >= 0.2) >= 0.95


def test_degree_closed_form():
    """Gamma-degree of (i, j) is d_i d_j + (m - d_i)(m - d_j) with m = n - 1."""
    for s in range(5):
        g, h = random_graph_pair(9, s)
        a, b, m = g.degrees(), h.degrees(), 8
        want = (np.outer(a, b) + np.outer(m - a, m - b)).reshape(-1)
        assert np.array_equal(product_adjacency(g, h).sum(axis=1), want)


def _degree_band_violations(n, seeds=100):
    bad = 0
    for s in range(seeds):
        inst = gen_no_instance(n, make_rng(s))
        deg = product_adjacency(inst.g, inst.h).sum(axis=1)
        m2 = (n - 1) ** 2
        bad += bool(deg.min() < m2 / 4 or deg.max() > 3 * m2 / 4)
    return bad


def test_degree_band_at_20():
    assert _degree_band_violations(20, 30) == 0


@pytest.mark.xfail(strict=True, reason="at n=8 extreme vertex degrees leave the [m^2/4, 3m^2/4] band in about 44% of seeds")
def test_degree_band_at_8():
    assert _degree_band_violations(8) == 0


def test_matching_vs_other_degree_contrast_at_16():
    """Matching product vertices have higher degree by about 1/(n-1) relative, on average."""
    rel = []
    for s in range(30):
        inst = gen_yes_instance(16, 0.05, make_rng(s))
        deg = product_adjacency(inst.g, inst.h).sum(axis=1)
        m = np.zeros(256, dtype=bool)
        m[matching_indices(inst.planted)] = True
        rel.append(deg[m].mean() / deg[~m].mean() - 1)
    assert np.mean(np.abs(rel)) <= 0.10


def test_matching_set_and_density(rng):
    inst = gen_yes_instance(10, 0.05, rng)
    ms = matching_set(inst.planted)
    assert len(ms) == 10 and all(isinstance(x, ProductVertex) for x in ms)
    assert matching_density(inst.g, inst.h, inst.planted) == pytest.approx(1 - inst.planted_edits / 45)
    g = gen_gnp(7, 0.5, rng)
    pi = Permutation.random(7, rng)
    assert matching_density(g, apply_permutation(g, pi), pi) == 1.0


@pytest.mark.parametrize("seed", range(10))
def test_internal_degree_equals_n_minus_1_minus_defect(seed):
    inst = gen_yes_instance(11, 0.2, make_rng(seed))
    d = defect_profile(inst.g, inst.h, inst.planted)
    assert internal_degrees(inst.g, inst.h, inst.planted).tolist() == (10 - d).tolist()


@pytest.mark.parametrize("seed", range(30))
def test_matching_density_bar_on_yes(seed):
    inst = gen_yes_instance(14, 0.05, make_rng(seed))
    assert matching_density(inst.g, inst.h, inst.planted) >= 1 - 2 * 0.05


def _asymmetric_graph(n, rng):
    """Random graph whose only automorphism is the identity."""
    import itertools

    while True:
        g = gen_gnp(n, 0.5, rng)
        autos = sum(apply_permutation(g, Permutation(p)) == g for p in itertools.permutations(range(n)))
        if autos == 1:
            return g


def test_overlap_exact_pair_without_automorphisms(rng):
    g = _asymmetric_graph(6, rng)
    pi = Permutation.random(6, rng)
    rep = overlap_property_check(g, apply_permutation(g, pi), 0.01)
    assert rep.optimum == 0 and rep.optimal_perm == pi
    assert rep.passing == 1 and rep.ok


@pytest.mark.xfail(strict=True, reason="automorphisms and near-automorphisms of G(6,1/2) give dense sets far from the optimum")
def test_overlap_yes_instances_n6():
    for s in range(50):
        inst = gen_yes_instance(6, 0.05, make_rng(s))
        assert overlap_property_check(inst.g, inst.h, 0.05).ok


def test_overlap_violations_are_near_isomorphisms():
    """Every offender is itself within one edit, so it is an alternative optimum, not noise."""
    seen = 0
    for s in range(50):
        inst = gen_yes_instance(6, 0.05, make_rng(s))
        rep = overlap_property_check(inst.g, inst.h, 0.05)
        for _, agree, ed in rep.violations:
            seen += 1
            assert ed <= rep.optimum + 1
            assert agree < rep.bound
    assert seen > 0


def test_overlap_no_instance_usually_vacuous():
    passing = [overlap_property_check(*random_graph_pair(6, s), 0.05).passing for s in range(20)]
    assert np.mean(np.array(passing) == 0) >= 0.5


def test_dense_guard():
    with pytest.raises(ValueError):
        product_adjacency(Graph.empty(21), Graph.empty(21))
    with pytest.raises(ValueError):
        overlap_property_check(Graph.empty(8), Graph.empty(8), 0.1)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 7), st.integers(0, 10_000))
def test_transition_matrix_symmetric(n, seed):
    g, h = random_graph_pair(n, seed)
    p = transition_matrix(g, h)
    assert np.array_equal(p, p.T)
    assert np.all(np.diag(p) >= 0.5)
