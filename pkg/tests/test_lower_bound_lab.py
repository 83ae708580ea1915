import itertools
import math

import numpy as np
import pytest

from approxgi.graph_core import Graph, gen_gnp, make_rng, min_edit_distance_bruteforce, num_pairs
from approxgi.lower_bound_lab import (
    ADVANTAGE_HEADER,
    REPLAYABLE,
    SilentStrategy,
    advantage_csv,
    build_hard_no,
    hard_h_budget,
    newcombe_half_width,
    no_collision_uniformity,
    sample_batch,
    transcript_advantage,
    tv_bound,
    tv_bound_loose,
    wilson_interval,
)
from approxgi.query_oracle import QueryCounter


def test_tv_bound_examples():
    assert tv_bound(0.05, 0, 30, 20) == 0.0
    assert tv_bound(0.05, 25, 25, 20) == pytest.approx(0.05 * 625 / 140)
    assert round(tv_bound(0.05, 25, 25, 20), 4) == 0.2232
    assert tv_bound_loose(0.05, 50, 20) == pytest.approx(1.25)
    assert tv_bound_loose(0.05, 50, 20) > tv_bound(0.05, 25, 25, 20)


def test_tv_bound_precondition():
    with pytest.raises(ValueError):
        tv_bound(0.05, 50, 50, 12)  # 100 > 66/2
    with pytest.raises(ValueError):
        tv_bound(0.05, -1, 3, 12)
    assert tv_bound(0.05, 50, 50, 12, diagnostics=True) == math.inf
    assert tv_bound(0.05, 20, 20, 12, diagnostics=True) == pytest.approx(0.05 * 400 / 26)


def test_tv_bound_monotone_grid():
    eps = [0.01, 0.05, 0.1, 0.2]
    qs = [1, 3, 5, 10]
    ns = [12, 16, 20, 30]
    for e, qg, qh, n in itertools.product(eps, qs, qs, ns):
        b = tv_bound(e, qg, qh, n)
        for e2 in eps:
            if e2 > e:
                assert tv_bound(e2, qg, qh, n) > b
        for q2 in qs:
            if q2 > qg:
                assert tv_bound(e, q2, qh, n) > b
            if q2 > qh:
                assert tv_bound(e, qg, q2, n) > b
        for n2 in ns:
            if n2 > n:
                assert tv_bound(e, qg, qh, n2) < b


def test_intervals():
    lo, hi = wilson_interval(0, 100)
    assert lo == pytest.approx(0.0, abs=1e-12) and 0 < hi < 0.05
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    assert newcombe_half_width(0, 1000, 0, 1000) > 0


def test_sample_batch_shapes_and_worlds(rng):
    gb, hb, perms = sample_batch(8, 0.1, 50, "yes", rng)
    assert gb.shape == hb.shape == (50, 28) and perms.shape == (50, 8)
    assert all(sorted(p) == list(range(8)) for p in perms)
    with pytest.raises(ValueError):
        sample_batch(8, 0.1, 5, "maybe", rng)


def test_zero_queries_advantage_ci_contains_zero(rng):
    rep = transcript_advantage("a", 12, 0.05, 0, 2000, rng)
    assert rep.tv_bound == 0.0
    assert rep.advantage - 3 * rep.ci_half <= 0 <= rep.advantage + 3 * rep.ci_half
    assert rep.within_bound


def test_advantage_n20_q20():
    rep = transcript_advantage("a", 20, 0.05, 20, 10_000, make_rng(20))
    assert rep.tv_bound == pytest.approx(tv_bound(0.05, 10, 10, 20))
    assert 0 <= rep.advantage <= 1
    assert rep.advantage <= rep.tv_bound + 3 * rep.ci_half


def test_advantage_rejects_large_q(rng):
    with pytest.raises(ValueError):
        transcript_advantage("a", 12, 0.05, 40, 10, rng)
    with pytest.raises(ValueError):
        transcript_advantage("zz", 12, 0.05, 4, 10, rng)
    rep = transcript_advantage("a", 12, 0.05, 40, 200, rng, diagnostics=True)
    assert rep.diagnostics


@pytest.mark.xfail(strict=True, reason="the baseline's random permutations never hit the planted one, so a full read does not separate the worlds")
def test_full_read_baseline_separates():
    rep = transcript_advantage("b", 12, 0.05, 2 * num_pairs(12), 200, make_rng(1), diagnostics=True)
    assert rep.advantage >= 0.9


def test_advantage_csv_header(rng):
    rep = transcript_advantage("a", 12, 0.05, 10, 100, rng)
    lines = advantage_csv([rep]).splitlines()
    assert lines[0] == ",".join(ADVANTAGE_HEADER)
    assert lines[0] == "n,epsilon,q,strategy,advantage,ci_half,tv_bound,trials"
    assert len(lines) == 2


@pytest.mark.parametrize("eps", [0.05, 0.1])
def test_collision_free_answers_fair(eps):
    rep = no_collision_uniformity(16, eps, 1000, make_rng(16))
    assert rep.free_steps >= 10**4
    assert rep.free_ok()
    assert rep.flip_ok()
    # an earlier 0 in G turns into a 1 in H at rate eps / 2
    p = eps / 2
    sd = math.sqrt(p * (1 - p) / rep.collision_after_zero)
    assert abs(rep.after_zero_frequency - p) <= 3 * sd


def test_noiseless_collisions_never_flip():
    rep = no_collision_uniformity(16, 0.0, 500, make_rng(0))
    assert rep.collision_steps > 0 and rep.collision_flips == 0
    assert rep.flip_ok()


def _dense(n, rng):
    while True:
        g = gen_gnp(n, 0.5, rng)
        if 4 * g.num_edges >= num_pairs(n):
            return g


def test_hard_no_zero_queries_is_empty(rng):
    g = _dense(7, rng)
    hard = build_hard_no(g, SilentStrategy(3, q_g=10, q_h=0), 0, 0.05)
    assert hard.h_no == Graph.empty(7)
    assert hard.transcripts_equal and hard.verdict_yes == hard.verdict_no


def test_hard_no_preconditions(rng):
    g = _dense(8, rng)
    with pytest.raises(ValueError):
        build_hard_no(Graph.empty(8), SilentStrategy(0, 1, 0), 0, 0.2)
    with pytest.raises(ValueError):
        build_hard_no(g, SilentStrategy(0, 1, 0), 100, 0.2)
    with pytest.raises(ValueError):
        build_hard_no(g, REPLAYABLE["echo"](0, 4, 3), 2, 0.2)


def test_hard_h_budget():
    assert hard_h_budget(8, 0.05) == 0  # 0.7 rounds down below the strict limit
    assert hard_h_budget(8, 0.2) == 2  # limit 2.8
    assert hard_h_budget(6, 0.2) == 1  # limit exactly 1.5
    assert hard_h_budget(10, 0.2) == 4  # limit 4.5


@pytest.mark.parametrize("name", sorted(REPLAYABLE))
def test_hard_no_replays_transcript(name):
    rng = make_rng(len(name))
    for _ in range(10):
        n = int(rng.integers(6, 9))
        g = _dense(n, rng)
        budget = hard_h_budget(n, 0.2)
        strat = REPLAYABLE[name](int(rng.integers(2**31)), q_g=num_pairs(n) // 2, q_h=budget)
        hard = build_hard_no(g, strat, budget, 0.2)
        assert hard.transcripts_equal
        assert hard.verdict_yes == hard.verdict_no
        # difference from H_yes lies outside the queried set
        diff = {(u, v) for u in range(n) for v in range(u + 1, n) if hard.h_no.matrix[u, v] != g.matrix[u, v]}
        assert not diff & hard.queried_h
        assert diff | hard.queried_h >= {(u, v) for u in range(n) for v in range(u + 1, n) if g.matrix[u, v]}
        assert len(hard.queried_h) <= budget


def test_hard_no_is_far_from_g_star():
    for s in range(10):
        rng = make_rng(s)
        n = 6 + s % 3
        g = _dense(n, rng)
        budget = hard_h_budget(n, 0.05)
        hard = build_hard_no(g, REPLAYABLE["echo"](s, q_g=5, q_h=budget), budget, 0.05)
        d, _ = min_edit_distance_bruteforce(g, hard.h_no)
        assert d >= (0.25 - 0.05 / 2) * num_pairs(n)


def test_strategy_is_deterministic(rng):
    g = _dense(8, rng)
    s = REPLAYABLE["oblivious"](42, 6, 2)
    c1, c2 = QueryCounter(g, g), QueryCounter(g, g)
    assert s.run(c1) == s.run(c2)
    assert c1.transcript == c2.transcript
