import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from approxgi.graph_core import Graph, gen_yes_instance, make_rng
from approxgi.product_walk import chain_spectrum, matching_indices
from approxgi.query_oracle import QueryCounter
from approxgi.szegedy_sim import (
    EdgeState,
    WalkOperator,
    apply_walk,
    arccos_phases,
    default_gates_per_step,
    depolarized_prob,
    measure_first_register,
    phase_gap,
    psi_block,
    reflect_marked,
    stationary_edge_state,
    vertex_edge_state,
    walk_eigenphases,
    walk_probe,
)

from conftest import random_graph_pair


def same_phases(a, b, tol=1e-8):
    def canon(x):
        x = np.asarray(x, dtype=float).copy()
        x[x < -math.pi + tol] = math.pi
        return np.sort(x)

    a, b = canon(a), canon(b)
    return a.shape == b.shape and np.max(np.abs(a - b), initial=0.0) <= tol


def random_state(n, rng):
    d = n**4
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return EdgeState(n, (v / np.linalg.norm(v)).reshape(n * n, n * n))


def test_psi_block_examples():
    g, h = random_graph_pair(5, 1)
    for x in [(0, 0), (2, 4)]:
        b = psi_block(x, g, h)
        assert abs(np.linalg.norm(b) - 1) <= 1e-12
        assert abs(b[x[0] * 5 + x[1]]) >= math.sqrt(0.5) - 1e-12
    k3 = Graph.complete(3)
    b = psi_block((0, 0), k3, k3)
    targets = [1 * 3 + 1, 1 * 3 + 2, 2 * 3 + 1, 2 * 3 + 2]
    assert np.allclose(b[targets] ** 2, 1 / 8)
    assert abs(b[0] ** 2 - 0.5) <= 1e-12


def test_walk_charges_two_per_step():
    g, h = random_graph_pair(4, 2)
    c = QueryCounter(g, h)
    s = stationary_edge_state(g, h)
    for _ in range(5):
        s = apply_walk(s, g, h, c)
    assert c.coherent_g + c.coherent_h == 10


@pytest.mark.parametrize("n", [6, 10])
def test_stationary_state_is_fixed(n):
    g, h = random_graph_pair(n, n)
    s = stationary_edge_state(g, h)
    assert abs(s.norm() - 1) <= 1e-12
    w = apply_walk(s, g, h)
    assert np.linalg.norm(w.amps - s.amps) <= 1e-10


def test_reflections_are_involutions_and_unitary(rng):
    g, h = random_graph_pair(4, 3)
    op = WalkOperator(g, h)
    for _ in range(20):
        u = random_state(4, rng)
        assert np.linalg.norm(op.ref_a(op.ref_a(u.amps)) - u.amps) <= 1e-12
        assert abs(np.linalg.norm(op.step(u.amps)) - 1) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.booleans(), min_size=16, max_size=16), st.integers(1, 6))
def test_norm_preserved_by_any_sequence(seed, mask, steps):
    g, h = random_graph_pair(4, seed)
    r = np.random.default_rng(seed)
    s = random_state(4, r)
    op = WalkOperator(g, h)
    m = np.array(mask)
    for _ in range(steps):
        s = reflect_marked(apply_walk(s, g, h, op=op), m)
    assert abs(s.norm() ** 2 - 1) <= 1e-10


def test_reflect_marked_examples(rng):
    s = random_state(3, rng)
    assert np.array_equal(reflect_marked(s, []).amps, s.amps)
    twice = reflect_marked(reflect_marked(s, [(0, 1), (2, 2)]), [(0, 1), (2, 2)])
    assert np.array_equal(twice.amps, s.amps)
    c = QueryCounter(Graph.empty(3), Graph.empty(3))
    reflect_marked(s, [(1, 1)], c, r=11)
    assert (c.coherent_g, c.coherent_h) == (11, 11)


def test_measurement_of_stationary_and_point_states():
    g, h = random_graph_pair(6, 4)
    p = measure_first_register(stationary_edge_state(g, h))
    assert abs(p.sum() - 1) <= 1e-10
    assert np.allclose(p, 1 / 36, atol=1e-10)
    q = measure_first_register(vertex_edge_state((2, 5), g, h))
    assert abs(q[2 * 6 + 5] - 1) <= 1e-12


@pytest.mark.parametrize("n", [6, 10, 14])
def test_matching_mass_under_stationary_state(n):
    inst = gen_yes_instance(n, 0.05, make_rng(n))
    p = measure_first_register(stationary_edge_state(inst.g, inst.h))
    assert abs(p[matching_indices(inst.planted)].sum() - 1 / n) <= 1e-10


# ---------------------------------------------------------------- eigenphases

def test_arccos_phase_special_values():
    assert same_phases(arccos_phases([1.0]), [0.0])
    assert same_phases(arccos_phases([0.0]), [-math.pi / 2, math.pi / 2])


@pytest.mark.parametrize("n,seeds", [(3, 10), (4, 5), (5, 1)])
def test_full_step_phases_are_twice_arccos(n, seeds):
    for s in range(seeds):
        g, h = random_graph_pair(n, s)
        lam = chain_spectrum(g, h).eigenvalues
        assert same_phases(walk_eigenphases(g, h), arccos_phases(lam, multiple=2))


@pytest.mark.parametrize("n,seeds", [(3, 10), (4, 5), (5, 1)])
def test_half_step_phases_are_arccos(n, seeds):
    for s in range(seeds):
        g, h = random_graph_pair(n, s)
        lam = chain_spectrum(g, h).eigenvalues
        assert same_phases(walk_eigenphases(g, h, half_step=True), arccos_phases(lam))


def test_half_step_squares_to_full_step(rng):
    g, h = random_graph_pair(4, 9)
    op = WalkOperator(g, h)
    u = random_state(4, rng).amps
    assert np.linalg.norm(op.half_step(op.half_step(u)) - op.step(u)) <= 1e-12


def test_phase_gap_against_spectral_gap():
    for s in range(50):
        g, h = random_graph_pair(4, 100 + s)
        delta = max(chain_spectrum(g, h).spectral_gap, 0.0)
        assert phase_gap(walk_eigenphases(g, h)) >= 0.9 * math.sqrt(delta)


def test_eigenphase_size_guard():
    with pytest.raises(ValueError):
        walk_eigenphases(Graph.empty(7), Graph.empty(7))


# ---------------------------------------------------------------- noise and probes

def test_depolarized_prob_examples():
    assert depolarized_prob(0.3, 50, 0.0, 10, 0.1) == 0.3
    assert depolarized_prob(0.3, 10**6, 0.5, 10, 0.1) == pytest.approx(0.1)
    for t in range(0, 200, 7):
        v = depolarized_prob(0.8, t, 1e-3, 12, 0.05)
        assert 0.05 <= v <= 0.8
    with pytest.raises(ValueError):
        depolarized_prob(1.5, 1, 0.0, 1, 0.1)
    assert default_gates_per_step(20) == math.ceil(5 * math.log2(20))


def test_walk_probe_stationary_constant(rng):
    inst = gen_yes_instance(8, 0.05, rng)
    tr = walk_probe(inst.g, inst.h, inst.planted, 12)
    assert np.allclose(tr.prob_matching, 1 / 8, atol=1e-12)
    assert tr.to_csv().splitlines()[0] == "t,prob_matching,prob_matching_noisy"


def test_walk_probe_vertex_start():
    inst = gen_yes_instance(10, 0.05, make_rng(1))
    tr = walk_probe(inst.g, inst.h, inst.planted, 20, "vertex_start_cesaro", make_rng(2), trials=400)
    # at t = 0 the start vertex lies in M_pi with probability 1/n
    assert abs(tr.prob_matching[0] - 0.1) <= 3 * math.sqrt(0.09 / 400)
    assert np.abs(np.diff(tr.prob_matching))[10:].max() < 0.01


def test_walk_probe_noise_column():
    inst = gen_yes_instance(6, 0.05, make_rng(5))
    tr = walk_probe(inst.g, inst.h, inst.planted, 5, p_err=0.01)
    assert np.allclose(tr.prob_matching_noisy, 1 / 6)
