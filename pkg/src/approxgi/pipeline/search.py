"""Walk-based marked-vertex search and seed collection.

Each search prepares the stationary edge state and runs ``search_rounds``
rounds of (marked reflection, ``walk_steps_per_round`` walk steps) before
measuring the first register.  The coherent evolution does not depend on any
random choice, so :class:`WalkSearch` computes the final outcome distribution
once per (G, H, marked set) and every restart only samples from it.  The
query charges are still booked per restart.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from ..graph_core import Graph
from ..product_walk import ProductVertex
from ..szegedy_sim import EdgeState, WalkOperator, measure_first_register, stationary_edge_state
from .config import PipelineConfig
from .marking import marked_mask, marking_check


class WalkSearch:
    """Outcome distribution of one coherent search, cached.

    ``marked`` overrides the exact consistency predicate with an explicit
    boolean mask over product vertices (diagnostics only).  ``fidelity``
    mixes the ideal outcome distribution with the uniform one, the global
    depolarising model of a noisy search.
    """

    def __init__(self, g: Graph, h: Graph, cfg: PipelineConfig, marked: Optional[np.ndarray] = None, fidelity: float = 1.0):
        self.g, self.h, self.cfg = g, h, cfg
        self.n = g.n
        self.marked = marked_mask(g, h, cfg) if marked is None else np.asarray(marked, dtype=bool)
        if self.marked.shape != (self.n * self.n,):
            raise ValueError("marked mask must cover all n^2 product vertices")
        self.fidelity = fidelity
        self._ideal = None

    @property
    def ideal_distribution(self) -> np.ndarray:
        if self._ideal is None:
            op = WalkOperator(self.g, self.h)
            amps = stationary_edge_state(self.g, self.h, op).amps
            sign = np.where(self.marked, -1.0, 1.0)[:, None]
            for _ in range(self.cfg.search_rounds):
                amps = amps * sign
                for _ in range(self.cfg.walk_steps_per_round):
                    amps = op.step(amps)
            p = measure_first_register(EdgeState(self.n, amps))
            self._ideal = p / p.sum()
        return self._ideal

    def with_fidelity(self, fidelity: float) -> "WalkSearch":
        """Copy at another fidelity, sharing the cached ideal distribution."""
        out = WalkSearch(self.g, self.h, self.cfg, marked=self.marked, fidelity=fidelity)
        out._ideal = self._ideal
        return out

    @property
    def distribution(self) -> np.ndarray:
        p = self.ideal_distribution
        if self.fidelity >= 1.0:
            return p
        return self.fidelity * p + (1.0 - self.fidelity) / p.size

    @property
    def success_probability(self) -> float:
        """Probability that the measured vertex lies in the marked set."""
        return float(self.distribution[self.marked].sum())

    @property
    def walk_steps(self) -> int:
        return self.cfg.search_rounds * self.cfg.walk_steps_per_round

    def charge(self, counter) -> None:
        cfg = self.cfg
        per_round = cfg.r + cfg.walk_steps_per_round  # per oracle
        counter.charge_coherent("G", cfg.search_rounds * per_round)
        counter.charge_coherent("H", cfg.search_rounds * per_round)

    def sample(self, rng: np.random.Generator) -> ProductVertex:
        x = int(rng.choice(self.n * self.n, p=self.distribution))
        return ProductVertex(*divmod(x, self.n))


def quantum_walk_search(
    counter,
    g: Graph,
    h: Graph,
    cfg: PipelineConfig,
    rng: np.random.Generator,
    engine: Optional[WalkSearch] = None,
) -> Optional[ProductVertex]:
    """Search, measure and confirm with the sampled marking oracle.

    Up to ``1 + search_restarts`` runs; returns ``None`` when none confirms.
    """
    engine = engine if engine is not None else WalkSearch(g, h, cfg)
    for _ in range(1 + cfg.search_restarts):
        engine.charge(counter)
        x = engine.sample(rng)
        if marking_check(counter, g, h, x, cfg, rng):
            return x
    return None


def collect_seeds(
    counter,
    g: Graph,
    h: Graph,
    cfg: PipelineConfig,
    rng: np.random.Generator,
    engine: Optional[WalkSearch] = None,
) -> list[ProductVertex]:
    """Repeat the search until ``s`` seeds with fresh coordinates or ``10 s`` attempts.

    A seed is kept only if neither its G vertex nor its H vertex is already
    used, so the seeds always form a partial injection.
    """
    engine = engine if engine is not None else WalkSearch(g, h, cfg)
    seeds: list[ProductVertex] = []
    used_i: set = set()
    used_j: set = set()
    for _ in range(cfg.seed_attempts_per_seed * cfg.s):
        if len(seeds) >= cfg.s:
            break
        x = quantum_walk_search(counter, g, h, cfg, rng, engine)
        if x is None or x.i in used_i or x.j in used_j:
            continue
        seeds.append(x)
        used_i.add(x.i)
        used_j.add(x.j)
    return seeds
