"""Empirical side of the classical query lower bound.

Covers the transcript total-variation bound, distinguishing-advantage
experiments against it, the collision statistics behind it, and the
adversarial construction of a far NO instance that replays a YES transcript.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.stats import norm

from .graph_core import Graph, num_pairs, triu_pairs
from .pipeline.decide import baseline_decide
from .query_oracle import QueryCounter, Transcript

ADVANTAGE_HEADER = ["n", "epsilon", "q", "strategy", "advantage", "ci_half", "tv_bound", "trials"]


# ---------------------------------------------------------------- bounds

def tv_bound(epsilon: float, q_g: int, q_h: int, n: int, diagnostics: bool = False) -> float:
    """``eps * q_g * q_h / (C(n,2) - q_g - q_h)``.

    The bound is only proved for ``q_g + q_h <= C(n,2) / 2``; outside that
    range a ``ValueError`` is raised unless ``diagnostics`` is set, in which
    case the same expression is returned (``inf`` once the denominator
    vanishes).
    """
    if min(q_g, q_h) < 0:
        raise ValueError("query counts must be nonnegative")
    c = num_pairs(n)
    q = q_g + q_h
    if q > c / 2 and not diagnostics:
        raise ValueError(f"q_g + q_h = {q} exceeds C(n,2)/2 = {c / 2}; the bound does not apply")
    if q_g == 0 or q_h == 0:
        return 0.0
    den = c - q
    if den <= 0:
        return math.inf
    return epsilon * q_g * q_h / den


def tv_bound_loose(epsilon: float, q: int, n: int) -> float:
    """The cruder ``4 eps q^2 / n^2`` form."""
    return 4.0 * epsilon * q * q / (n * n)


# ---------------------------------------------------------------- intervals

def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    z = norm.ppf(0.5 + level / 2)
    p = successes / trials
    den = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


def newcombe_half_width(x1: int, n1: int, x2: int, n2: int, level: float = 0.95) -> float:
    """Half-width of the Newcombe hybrid-score interval for ``p1 - p2``."""
    p1, p2 = x1 / n1, x2 / n2
    l1, u1 = wilson_interval(x1, n1, level)
    l2, u2 = wilson_interval(x2, n2, level)
    lo = (p1 - p2) - math.sqrt((p1 - l1) ** 2 + (u2 - p2) ** 2)
    hi = (p1 - p2) + math.sqrt((u1 - p1) ** 2 + (p2 - l2) ** 2)
    return (hi - lo) / 2


# ---------------------------------------------------------------- instance batches

def _pair_lookup(n: int) -> np.ndarray:
    iu, iv = triu_pairs(n)
    table = np.full((n, n), -1, dtype=np.int64)
    k = np.arange(iu.size)
    table[iu, iv] = k
    table[iv, iu] = k
    return table


def sample_batch(n: int, epsilon: float, trials: int, world: str, rng: np.random.Generator):
    """Bit vectors for ``trials`` draws of (G, H) plus the planted permutations.

    ``world="yes"`` plants ``H = pi(G)`` with independent ``eps/2`` flips;
    ``world="no"`` draws H independently.  Both have G(n,1/2) marginals.
    Permutations are returned for both worlds so collision bookkeeping can use
    them; in the NO world they carry no information.
    """
    c = num_pairs(n)
    gb = rng.random((trials, c)) < 0.5
    perms = np.argsort(rng.random((trials, n)), axis=1)
    if world == "no":
        return gb, rng.random((trials, c)) < 0.5, perms
    if world != "yes":
        raise ValueError(f"world must be 'yes' or 'no', got {world!r}")
    iu, iv = triu_pairs(n)
    dest = _pair_lookup(n)[perms[:, iu], perms[:, iv]]
    flips = rng.random((trials, c)) < epsilon / 2
    hb = np.empty_like(gb)
    np.put_along_axis(hb, dest, gb ^ flips, axis=1)
    return gb, hb, perms


def _distinct_positions(trials: int, c: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` distinct positions per row, uniformly."""
    return np.argsort(rng.random((trials, c)), axis=1)[:, :k]


# ---------------------------------------------------------------- distinguishers

def strategy_mismatch(gb: np.ndarray, hb: np.ndarray, n: int, epsilon: float, q: int, rng: np.random.Generator) -> np.ndarray:
    """Strategy (a): read ``q // 2`` G positions, then the same positions in H.

    Accepts when the mismatch fraction is below one half.  ``q < 2`` reads
    nothing and accepts with probability one half.
    """
    trials, c = gb.shape
    k = min(q // 2, c)
    if k == 0:
        return rng.random(trials) < 0.5
    pos = _distinct_positions(trials, c, k, rng)
    g = np.take_along_axis(gb, pos, axis=1)
    h = np.take_along_axis(hb, pos, axis=1)
    return (g != h).mean(axis=1) < 0.5


def strategy_baseline(gb: np.ndarray, hb: np.ndarray, n: int, epsilon: float, q: int, rng: np.random.Generator) -> np.ndarray:
    """Strategy (b): :func:`baseline_decide` with budget ``q``."""
    trials = gb.shape[0]
    if q < 2:
        return rng.random(trials) < 0.5
    out = np.empty(trials, dtype=bool)
    for t in range(trials):
        out[t] = baseline_decide(Graph(n, gb[t]), Graph(n, hb[t]), epsilon, q, rng) == "YES"
    return out


STRATEGIES: dict[str, Callable] = {"a": strategy_mismatch, "b": strategy_baseline}


@dataclass
class AdvantageReport:
    n: int
    epsilon: float
    q: int
    strategy: str
    accept_yes: float
    accept_no: float
    advantage: float
    ci_half: float
    tv_bound: float
    trials: int
    diagnostics: bool = False

    @property
    def within_bound(self) -> bool:
        return self.advantage <= self.tv_bound + 3 * self.ci_half

    def row(self) -> list:
        return [self.n, self.epsilon, self.q, self.strategy, f"{self.advantage:.6f}", f"{self.ci_half:.6f}", f"{self.tv_bound:.6f}", self.trials]


def advantage_csv(reports) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(ADVANTAGE_HEADER)
    for r in reports:
        wr.writerow(r.row())
    return buf.getvalue()


def transcript_advantage(
    strategy: str,
    n: int,
    epsilon: float,
    q: int,
    trials: int,
    rng: np.random.Generator,
    diagnostics: bool = False,
    batch: int = 2000,
) -> AdvantageReport:
    """Acceptance-rate gap of a ``q``-query distinguisher between the two worlds.

    The budget is split ``q_g = q // 2``, ``q_h = q - q_g``.  With
    ``diagnostics`` the ``q <= C(n,2)/2`` precondition is waived.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {sorted(STRATEGIES)}")
    c = num_pairs(n)
    if q > c / 2 and not diagnostics:
        raise ValueError(f"q = {q} exceeds C(n,2)/2 = {c / 2}; pass diagnostics=True to override")
    fn = STRATEGIES[strategy]
    q_g = q // 2
    counts = {}
    for world in ("yes", "no"):
        acc = 0
        done = 0
        while done < trials:
            m = min(batch, trials - done)
            gb, hb, _ = sample_batch(n, epsilon, m, world, rng)
            acc += int(fn(gb, hb, n, epsilon, q, rng).sum())
            done += m
        counts[world] = acc
    py, pn = counts["yes"] / trials, counts["no"] / trials
    half = newcombe_half_width(counts["yes"], trials, counts["no"], trials)
    bound = tv_bound(epsilon, q_g, q - q_g, n, diagnostics=diagnostics)
    return AdvantageReport(n, epsilon, q, strategy, py, pn, abs(py - pn), half, bound, trials, diagnostics)


# ---------------------------------------------------------------- collision statistics

@dataclass
class UniformityReport:
    n: int
    epsilon: float
    free_steps: int
    free_ones: int
    collision_steps: int
    collision_flips: int
    collision_after_zero: int
    ones_after_zero: int

    @property
    def free_frequency(self) -> float:
        return self.free_ones / self.free_steps if self.free_steps else math.nan

    @property
    def free_sigma(self) -> float:
        return math.sqrt(0.25 / self.free_steps) if self.free_steps else math.nan

    @property
    def flip_frequency(self) -> float:
        return self.collision_flips / self.collision_steps if self.collision_steps else math.nan

    @property
    def flip_sigma(self) -> float:
        p = self.epsilon / 2
        return math.sqrt(p * (1 - p) / self.collision_steps) if self.collision_steps else math.nan

    @property
    def after_zero_frequency(self) -> float:
        return self.ones_after_zero / self.collision_after_zero if self.collision_after_zero else math.nan

    def free_ok(self, k: float = 3.0) -> bool:
        return abs(self.free_frequency - 0.5) <= k * self.free_sigma

    def flip_ok(self, k: float = 3.0) -> bool:
        p = self.epsilon / 2
        if self.collision_steps == 0:
            return False
        if p == 0:
            return self.collision_flips == 0
        return abs(self.flip_frequency - p) <= k * self.flip_sigma


def no_collision_uniformity(
    n: int,
    epsilon: float,
    trials: int,
    rng: np.random.Generator,
    queries_per_oracle: Optional[int] = None,
) -> UniformityReport:
    """Interleaved G/H reads on planted draws, split by collision status.

    Each trial reads ``queries_per_oracle`` distinct positions in G and in H
    (default ``C(n,2) // 2``), alternating G, H, G, H.  An H read collides
    when the G position mapped onto it by the planted permutation was read
    earlier.  Collision-free H answers should be fair coins; colliding ones
    should disagree with the earlier G answer at rate ``eps / 2``.
    """
    c = num_pairs(n)
    k = c // 2 if queries_per_oracle is None else int(queries_per_oracle)
    if not 1 <= k <= c:
        raise ValueError(f"queries per oracle must lie in [1, {c}]")
    gb, hb, perms = sample_batch(n, epsilon, trials, "yes", rng)
    iu, iv = triu_pairs(n)
    dest = _pair_lookup(n)[perms[:, iu], perms[:, iv]]  # G position -> H position
    src = np.empty_like(dest)
    np.put_along_axis(src, dest, np.broadcast_to(np.arange(c), dest.shape), axis=1)  # H position -> G position
    gpos = _distinct_positions(trials, c, k, rng)
    hpos = _distinct_positions(trials, c, k, rng)
    # step of each G read is 2t, of each H read 2t+1; G position p read at step g_step[p]
    g_step = np.full((trials, c), np.iinfo(np.int64).max, dtype=np.int64)
    np.put_along_axis(g_step, gpos, 2 * np.arange(k)[None, :], axis=1)
    pre = np.take_along_axis(src, hpos, axis=1)
    collided = np.take_along_axis(g_step, pre, axis=1) < (2 * np.arange(k) + 1)[None, :]
    h_ans = np.take_along_axis(hb, hpos, axis=1)
    g_prev = np.take_along_axis(gb, pre, axis=1)
    free = ~collided
    zero = collided & ~g_prev
    return UniformityReport(
        n=n,
        epsilon=epsilon,
        free_steps=int(free.sum()),
        free_ones=int(h_ans[free].sum()),
        collision_steps=int(collided.sum()),
        collision_flips=int((h_ans != g_prev)[collided].sum()),
        collision_after_zero=int(zero.sum()),
        ones_after_zero=int(h_ans[zero].sum()),
    )


# ---------------------------------------------------------------- hard instances

class ReplayableStrategy:
    """A deterministic query strategy: same seed and answers, same queries.

    Subclasses implement :meth:`_play`, which must draw randomness only from
    the generator it is handed.
    """

    name = "abstract"

    def __init__(self, seed: int, q_g: int, q_h: int):
        self.seed = int(seed)
        self.q_g = int(q_g)
        self.q_h = int(q_h)

    def run(self, counter: QueryCounter) -> bool:
        return bool(self._play(counter, np.random.default_rng(self.seed)))

    def _play(self, counter: QueryCounter, rng: np.random.Generator) -> bool:
        raise NotImplementedError


def _random_pair(n: int, rng: np.random.Generator) -> tuple[int, int]:
    u, v = rng.choice(n, size=2, replace=False)
    return int(u), int(v)


class SilentStrategy(ReplayableStrategy):
    """Reads G only; accepts iff at least half of its reads are edges."""

    name = "silent"

    def _play(self, counter, rng):
        ones = sum(counter.read("G", *_random_pair(counter.n, rng)) for _ in range(self.q_g))
        return 2 * ones >= self.q_g


class ObliviousStrategy(ReplayableStrategy):
    """Fixed random positions in both oracles; accepts on agreement majority."""

    name = "oblivious"

    def _play(self, counter, rng):
        n = counter.n
        g = [counter.read("G", *_random_pair(n, rng)) for _ in range(self.q_g)]
        h = [counter.read("H", *_random_pair(n, rng)) for _ in range(self.q_h)]
        return sum(g) >= sum(h)


class EchoStrategy(ReplayableStrategy):
    """Adaptive: an H read repeats the last G pair if it was an edge, else moves on."""

    name = "echo"

    def _play(self, counter, rng):
        n = counter.n
        agree = 0
        last, last_ans = None, 0
        for t in range(max(self.q_g, self.q_h)):
            if t < self.q_g:
                last = _random_pair(n, rng)
                last_ans = counter.read("G", *last)
            if t < self.q_h:
                pair = last if (last is not None and last_ans) else _random_pair(n, rng)
                agree += counter.read("H", *pair) == last_ans
        return 2 * agree > self.q_h


class MismatchStrategy(ReplayableStrategy):
    """Strategy (a) as a replayable object (same positions in G then H)."""

    name = "mismatch"

    def _play(self, counter, rng):
        n = counter.n
        pairs = [_random_pair(n, rng) for _ in range(min(self.q_g, self.q_h))]
        g = [counter.read("G", *p) for p in pairs]
        h = [counter.read("H", *p) for p in pairs]
        return sum(a != b for a, b in zip(g, h)) * 2 < max(1, len(pairs))


REPLAYABLE = {cls.name: cls for cls in (SilentStrategy, ObliviousStrategy, EchoStrategy, MismatchStrategy)}


@dataclass
class HardInstance:
    g_star: Graph
    h_yes: Graph
    h_no: Graph
    transcript_yes: Transcript
    transcript_no: Transcript
    verdict_yes: bool
    verdict_no: bool
    queried_h: frozenset

    @property
    def transcripts_equal(self) -> bool:
        return self.transcript_yes == self.transcript_no


def hard_h_budget(n: int, epsilon: float) -> int:
    """Largest integer H-query count strictly below ``eps * C(n,2) / 2``."""
    lim = epsilon * num_pairs(n) / 2
    return max(0, math.ceil(lim) - 1)


def build_hard_no(g_star: Graph, strategy: ReplayableStrategy, budget_h: int, epsilon: float) -> HardInstance:
    """Graph that answers the strategy's H reads like ``g_star`` and is edgeless elsewhere."""
    c = num_pairs(g_star.n)
    if 4 * g_star.num_edges < c:
        raise ValueError(f"g_star has {g_star.num_edges} edges, need at least C(n,2)/4 = {c / 4}")
    if not budget_h < epsilon * c / 2:
        raise ValueError(f"H budget {budget_h} must be below eps*C(n,2)/2 = {epsilon * c / 2}")
    if strategy.q_h > budget_h:
        raise ValueError(f"strategy plans {strategy.q_h} H reads, budget is {budget_h}")
    yes = QueryCounter(g_star, g_star, h_budget=budget_h)
    verdict_yes = strategy.run(yes)
    us, vs, ans = [], [], []
    for e in yes.transcript:
        if e.which == "H":
            us.append(e.pair[0])
            vs.append(e.pair[1])
            ans.append(e.answer)
    a = np.zeros((g_star.n, g_star.n), dtype=bool)
    if us:
        a[us, vs] = ans
        a[vs, us] = ans
    h_no = Graph.from_matrix(a)
    no = QueryCounter(g_star, h_no, h_budget=budget_h)
    verdict_no = strategy.run(no)
    queried = frozenset((min(u, v), max(u, v)) for u, v in zip(us, vs))
    return HardInstance(g_star, g_star, h_no, yes.transcript, no.transcript, verdict_yes, verdict_no, queried)
