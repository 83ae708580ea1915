"""Amplitude estimation outcome model, verification and AE-based scoring."""
from __future__ import annotations

import math

import numpy as np

from ..graph_core import Graph, Permutation, edit_distance_under, num_pairs
from .config import PipelineConfig


def _check_grid(m: int) -> None:
    if m < 1 or m & (m - 1):
        raise ValueError(f"grid size must be a power of two, got {m}")


def _fejer(delta: np.ndarray, m: int) -> np.ndarray:
    den = np.sin(np.pi * delta)
    num = np.sin(m * np.pi * delta)
    small = np.abs(den) < 1e-12
    safe = np.where(small, 1.0, den)
    out = (num / safe) ** 2 / m**2
    return np.where(small, 1.0, out)


def ae_distribution(p_true: float, m: int) -> np.ndarray:
    """Exact distribution of the phase-estimation outcome ``y in [0, M)``.

    The Grover iterate has eigenphases ``+-2 theta`` with
    ``theta = arcsin(sqrt(p))``; the start state splits evenly between the
    two eigenvectors, so each outcome mixes two Fejer kernels.
    """
    _check_grid(m)
    if not 0.0 <= p_true <= 1.0:
        raise ValueError(f"probability must lie in [0,1], got {p_true}")
    theta = math.asin(math.sqrt(p_true))
    y = np.arange(m) / m
    w = 0.5 * (_fejer(y - theta / math.pi, m) + _fejer(y + theta / math.pi, m))
    return w / w.sum()


def ae_estimates(m: int) -> np.ndarray:
    return np.sin(np.pi * np.arange(m) / m) ** 2


def amplitude_estimate(p_true: float, m: int, rng: np.random.Generator) -> float:
    y = int(rng.choice(m, p=ae_distribution(p_true, m)))
    return float(np.sin(np.pi * y / m) ** 2)


def verify(counter, g: Graph, h: Graph, pi_hat: Permutation, cfg: PipelineConfig, rng: np.random.Generator) -> float:
    """Estimate the normalised edit distance of ``pi_hat`` on the ``ae_grid``."""
    if pi_hat.n != g.n:
        raise ValueError("pi_hat must be a full permutation of the vertex set")
    p_true = edit_distance_under(g, h, pi_hat) / num_pairs(g.n)
    m = cfg.ae_grid
    counter.charge_coherent("G", m)
    counter.charge_coherent("H", m)
    return amplitude_estimate(p_true, m, rng)


def grid_for_delta(delta: float) -> int:
    return 2 ** math.ceil(math.log2(math.pi / delta))


def score_ae(counter, g: Graph, h: Graph, v: int, w: int, seeds, seed_images, delta: float, rng: np.random.Generator) -> float:
    """AE estimate of ``signature(v, w) / s`` at resolution ``delta``."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0,1), got {delta}")
    seeds = list(seeds)
    seed_images = list(seed_images)
    gm, hm = g.matrix, h.matrix
    bits = [True if w == wi else bool(gm[v, vi] != hm[w, wi]) for vi, wi in zip(seeds, seed_images)]
    frac = sum(bits) / len(bits)
    uses = math.ceil(math.pi / delta)
    counter.charge_coherent("G", uses)
    counter.charge_coherent("H", uses)
    return amplitude_estimate(frac, grid_for_delta(delta), rng)
