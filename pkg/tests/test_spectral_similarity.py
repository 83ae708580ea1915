import math

import numpy as np
import pytest

from approxgi.graph_core import Graph, Permutation, apply_permutation, gen_gnp, laplacian_spectrum, make_rng
from approxgi.query_oracle import QueryCounter
from approxgi.spectral_similarity import (
    SPECTRUM_HEADER,
    SpectralConfig,
    grid_round,
    qpe_spectrum_sample,
    spectral_decide,
    spectral_distance,
)


def k3():
    return Graph.complete(3)


def p3():
    return Graph.from_edges(3, [(0, 1), (1, 2)])


def test_distance_examples():
    g = gen_gnp(7, 0.5, make_rng(0))
    assert spectral_distance(g, g) == 0.0
    assert spectral_distance(k3(), p3()) == pytest.approx(2.0, abs=1e-12)
    assert spectral_distance(Graph.complete(2), Graph.empty(2)) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ValueError):
        spectral_distance(k3(), Graph.empty(4))


def test_distance_is_pseudometric(rng):
    for _ in range(100):
        n = int(rng.integers(2, 9))
        a, b, c = (gen_gnp(n, 0.5, rng) for _ in range(3))
        assert spectral_distance(a, b) == spectral_distance(b, a)
        assert spectral_distance(a, c) <= spectral_distance(a, b) + spectral_distance(b, c) + 1e-9


def test_distance_invariant_under_relabelling(rng):
    g = gen_gnp(9, 0.4, rng)
    h = apply_permutation(g, Permutation.random(9, rng))
    assert spectral_distance(g, h) == pytest.approx(0.0, abs=1e-9)


def test_config_defaults_and_validation():
    cfg = SpectralConfig.for_n(10, 0.5, 3.0)
    assert cfg.eta == pytest.approx(2.5 / (4 * math.sqrt(10)))
    assert cfg.shots == math.ceil(40 * math.log(10))
    assert cfg.cutoff == 1.75 and cfg.cost_per_shot == math.ceil(1 / cfg.eta)
    with pytest.raises(ValueError):
        SpectralConfig.for_n(10, 2.0, 1.0)
    with pytest.raises(ValueError):
        SpectralConfig.for_n(10, 0.5, 1.0, shots=5)
    with pytest.raises(ValueError):
        SpectralConfig(0.0, 1.0, 0.0, 10)


def test_grid_round_ties_go_down():
    assert grid_round(0.15, 0.1) == pytest.approx(0.1)
    assert grid_round(0.16, 0.1) == pytest.approx(0.2)
    assert grid_round(0.0, 0.3) == 0.0


def test_empty_graph_estimates_zero(rng):
    est = qpe_spectrum_sample(Graph.empty(6), SpectralConfig.for_n(6, 0.5, 1.0), rng)
    assert np.all(est.estimates == 0)


def test_k4_rounding_bound(rng):
    cfg = SpectralConfig(0.0, 1.0, 0.1, 64)
    g = Graph.complete(4)
    assert np.allclose(laplacian_spectrum(g), [0, 4, 4, 4])
    for _ in range(20):
        est = qpe_spectrum_sample(g, cfg, rng)
        assert np.linalg.norm(est.estimates - est.true) <= math.sqrt(4) * 0.1 / 2 + 1e-12


def test_many_shots_fine_grid_converges(rng):
    g = gen_gnp(8, 0.5, rng)
    est = qpe_spectrum_sample(g, SpectralConfig(0.0, 1.0, 1e-6, 4000), rng)
    assert not est.any_flagged
    assert np.allclose(est.estimates, laplacian_spectrum(g), atol=1e-6)


def test_unsampled_indices_are_flagged_and_filled():
    g = gen_gnp(10, 0.5, make_rng(0))
    cfg = SpectralConfig(0.0, 1.0, 0.01, 10)
    est = qpe_spectrum_sample(g, cfg, make_rng(1))
    assert est.any_flagged  # 10 shots over 10 indices almost surely miss one
    rounded = grid_round(est.true, cfg.eta)
    seen = np.flatnonzero(~est.flagged)
    for i in np.flatnonzero(est.flagged):
        d = np.abs(seen - i)
        near = seen[np.argmin(d)]
        assert est.per_index[i] == rounded[near]


def test_spectrum_csv(rng):
    est = qpe_spectrum_sample(Graph.complete(4), SpectralConfig(0.0, 1.0, 0.1, 64), rng)
    lines = est.to_csv().splitlines()
    assert lines[0] == ",".join(SPECTRUM_HEADER) == "index,true_lambda,estimated_lambda"
    assert len(lines) == 5


def test_decide_identical_graphs_yes():
    rng = make_rng(5)
    g = gen_gnp(10, 0.5, rng)
    cfg = SpectralConfig.for_n(10, 0.5, 3.0)
    yes = sum(spectral_decide(g, g, cfg, rng).answer == "YES" for _ in range(50))
    assert yes / 50 >= 2 / 3


def test_decide_k3_p3_no_and_charge(rng):
    cfg = SpectralConfig.for_n(3, 0.5, 1.5)
    c = QueryCounter(k3(), p3())
    v = spectral_decide(k3(), p3(), cfg, rng, counter=c)
    assert v.answer == "NO"
    assert v.charge == 2 * cfg.shots * math.ceil(1 / cfg.eta)
    assert c.coherent_g == c.coherent_h == cfg.shots * math.ceil(1 / cfg.eta)
