"""The three-phase decision procedure and the classical sampling baseline."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..graph_core import Graph, Permutation, num_pairs, triu_pairs
from ..query_oracle import QueryCounter
from .config import PipelineConfig
from .estimation import verify
from .reconstruct import reconstruct, resolve_high_defect
from .search import WalkSearch, collect_seeds


@dataclass
class Verdict:
    answer: str
    estimate: Optional[float]
    pi_hat: Optional[Permutation]
    queries: dict
    phase_log: dict
    seed: int
    seeds: list = field(default_factory=list)

    @property
    def total_queries(self) -> int:
        return int(sum(self.queries.values()))

    def to_dict(self) -> dict:
        return {
            "answer": self.answer,
            "estimate": self.estimate,
            "queries": dict(self.queries),
            "phase_log": self.phase_log,
            "pi_hat": None if self.pi_hat is None else self.pi_hat.tolist(),
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _snapshot(counter: QueryCounter) -> dict:
    return counter.as_dict()


def _delta(before: dict, after: dict) -> dict:
    return {k: after[k] - before[k] for k in after}


def decide(
    g: Graph,
    h: Graph,
    cfg: PipelineConfig,
    rng: np.random.Generator,
    marked: Optional[np.ndarray] = None,
    counter: Optional[QueryCounter] = None,
    search: Optional[WalkSearch] = None,
) -> Verdict:
    """Seeds by walk search, reconstruction from seeds, AE verification.

    ``marked`` replaces the consistency predicate inside the search
    (diagnostics only); ``search`` lets callers inject a prepared engine.
    """
    counter = counter if counter is not None else QueryCounter(g, h)
    engine = search if search is not None else WalkSearch(g, h, cfg, marked=marked)
    log: dict = {}

    t0 = _snapshot(counter)
    seeds = collect_seeds(counter, g, h, cfg, rng, engine)
    t1 = _snapshot(counter)
    log["phase1"] = _delta(t0, t1)
    log["seeds_found"] = len(seeds)
    if len(seeds) < cfg.s:
        return Verdict("NO", None, None, counter.as_dict(), log, cfg.seed, seeds)

    partial = reconstruct(counter, g, h, seeds, cfg, rng)
    pi_hat = resolve_high_defect(counter, g, h, partial, cfg, rng)
    t2 = _snapshot(counter)
    log["phase2"] = _delta(t1, t2)
    log["unresolved"] = len(partial.unresolved)

    est = verify(counter, g, h, pi_hat, cfg, rng)
    log["phase3"] = _delta(t2, _snapshot(counter))
    answer = "YES" if est <= cfg.accept_cutoff else "NO"
    return Verdict(answer, est, pi_hat, counter.as_dict(), log, cfg.seed, seeds)


def walk_only_decide(
    g: Graph,
    h: Graph,
    cfg: PipelineConfig,
    rng: np.random.Generator,
    marked: Optional[np.ndarray] = None,
    counter: Optional[QueryCounter] = None,
    search: Optional[WalkSearch] = None,
) -> tuple[str, int]:
    """YES iff seed collection reaches ``s / 2`` confirmed seeds."""
    counter = counter if counter is not None else QueryCounter(g, h)
    engine = search if search is not None else WalkSearch(g, h, cfg, marked=marked)
    seeds = collect_seeds(counter, g, h, cfg, rng, engine)
    return ("YES" if len(seeds) >= cfg.s / 2 else "NO"), counter.total


def baseline_decide(
    g: Graph,
    h: Graph,
    epsilon: float,
    budget: int,
    rng: np.random.Generator,
    counter: Optional[QueryCounter] = None,
    n_perms: int = 10,
) -> str:
    """Random edge sampling against the identity and ``n_perms`` random permutations.

    ``budget // 2`` distinct pairs are read in both graphs.  A permutation is
    scored on the sampled pairs whose image is also sampled; it accepts when
    its mismatch fraction there is at most ``3 eps / 2``.
    """
    if budget < 2:
        raise ValueError("baseline needs a budget of at least 2")
    n = g.n
    c = num_pairs(n)
    counter = counter if counter is not None else QueryCounter(g, h)
    k = min(budget // 2, c)
    idx = np.sort(rng.choice(c, size=k, replace=False))
    iu, iv = triu_pairs(n)
    us, vs = iu[idx], iv[idx]
    ga = counter.read_many("G", us, vs)
    ha = counter.read_many("H", us, vs)
    known = np.full((n, n), -1, dtype=np.int8)
    known[us, vs] = ha
    known[vs, us] = ha
    perms = [np.arange(n)] + [rng.permutation(n) for _ in range(n_perms)]
    cutoff = 1.5 * epsilon
    for p in perms:
        hv = known[p[us], p[vs]]
        ok = hv >= 0
        if not ok.any():
            continue
        if np.mean(ga[ok] != hv[ok]) <= cutoff:
            return "YES"
    return "NO"
