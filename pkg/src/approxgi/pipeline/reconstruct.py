"""Seed-signature reconstruction and completion of the permutation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..graph_core import Graph, Permutation
from .config import PipelineConfig
from .estimation import score_ae


@dataclass
class PartialMap:
    n: int
    mapping: dict = field(default_factory=dict)  # G vertex -> H vertex
    unresolved: list = field(default_factory=list)

    @property
    def claimed(self) -> set:
        return set(self.mapping.values())

    def unclaimed(self) -> list:
        c = self.claimed
        return [w for w in range(self.n) if w not in c]


def signature(counter, v: int, w: int, seeds, seed_images) -> int:
    """Hamming weight of ``A_G[v, v_i] xor A_H[w, w_i]`` over the seeds.

    A candidate equal to a seed image conflicts with that seed and counts as
    a mismatch there without a query.
    """
    seeds = list(seeds)
    seed_images = list(seed_images)
    if v in seeds:
        raise ValueError(f"vertex {v} is a seed")
    weight = 0
    for vi, wi in zip(seeds, seed_images):
        a = counter.read("G", v, vi)
        if w == wi:
            weight += 1
            continue
        weight += a != counter.read("H", w, wi)
    return int(weight)


def reconstruct(counter, g: Graph, h: Graph, seeds, cfg: PipelineConfig, rng: Optional[np.random.Generator] = None) -> PartialMap:
    """Assign each non-seed vertex the unique low-weight signature minimiser.

    H entries ``A_H[w, w_i]`` do not depend on ``v``; they are read once for
    all candidates (``s`` per candidate), and each ``v`` costs ``s`` G reads.
    """
    seeds = list(seeds)
    if len(seeds) < 2:
        raise ValueError("reconstruction needs at least two seeds")
    n = g.n
    vs = np.array([x[0] for x in seeds])
    ws = np.array([x[1] for x in seeds])
    s = len(seeds)
    out = PartialMap(n, {int(a): int(b) for a, b in zip(vs, ws)})
    seed_set = set(out.mapping)
    cands = np.array([w for w in range(n) if w not in set(ws.tolist())])
    if cands.size == 0:
        out.unresolved = [v for v in range(n) if v not in seed_set]
        return out
    hblock = counter.read_many("H", np.repeat(cands, s), np.tile(ws, cands.size)).reshape(cands.size, s)
    use_ae = cfg.scoring == "ae"
    for v in range(n):
        if v in seed_set:
            continue
        grow = counter.read_many("G", np.full(s, v), vs)
        if use_ae:
            weights = np.array([
                score_ae(counter, g, h, v, int(w), vs, ws, 1.0 / (4 * s), rng) * s for w in cands
            ])
        else:
            weights = (hblock != grow[None, :]).sum(axis=1)
        best = weights.min()
        hits = np.flatnonzero(weights == best)
        w = int(cands[hits[0]])
        if hits.size == 1 and best < s / 4 and w not in out.claimed:
            out.mapping[v] = w
        else:
            out.unresolved.append(v)
    return out


def resolve_high_defect(counter, g: Graph, h: Graph, partial: PartialMap, cfg: PipelineConfig, rng: np.random.Generator) -> Permutation:
    """Complete ``partial`` to a bijection.

    Each unresolved ``v`` takes the unclaimed image that disagrees least with
    the resolved part on ``s`` sampled resolved vertices.  The comparison is
    the minimum-finding step of the quantum algorithm, so it is computed
    directly and charged ``ceil(sqrt(n))`` coherent queries per vertex.
    """
    n = g.n
    free = partial.unclaimed()
    if len(free) != len(partial.unresolved):
        raise ValueError("unresolved vertices and unclaimed images differ in number")
    mapping = dict(partial.mapping)
    if not partial.unresolved:
        return Permutation([mapping[v] for v in range(n)])
    resolved = np.array(sorted(partial.mapping), dtype=int)
    images = np.array([partial.mapping[u] for u in resolved], dtype=int)
    k = min(cfg.s, resolved.size)
    lump = math.ceil(math.sqrt(n))
    gm, hm = g.matrix, h.matrix
    free = sorted(free)
    for v in sorted(partial.unresolved):
        counter.charge_coherent("H", lump)
        if k > 0:
            pick = rng.choice(resolved.size, size=k, replace=False)
            us, ws = resolved[pick], images[pick]
            fa = np.array(free)
            dis = (gm[v, us][None, :] != hm[fa[:, None], ws[None, :]]).sum(axis=1)
            w = int(fa[int(np.argmin(dis))])
        else:
            w = free[0]
        mapping[v] = w
        free.remove(w)
    if free:
        raise RuntimeError("completion left unclaimed images")
    return Permutation([mapping[v] for v in range(n)])
