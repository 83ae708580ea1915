"""Consistency-based marking of product vertices.

A product vertex ``(i, j)`` is scored by the fraction of eligible pairs
``(i', j')`` (``i' != i``, ``j' != j``) with ``A_G[i, i'] == A_H[j, j']``.
Because ``i'`` and ``j'`` range independently, the count factorises:
with ``a = deg_G(i)``, ``b = deg_H(j)`` and ``m = n - 1`` it equals
``a b + (m - a)(m - b)``.  The exact score is therefore a function of the
two degrees alone, which is what :func:`exact_consistency_table` uses.
:func:`exact_consistency_fraction` enumerates pairs directly and serves as
the cross-check.
"""
from __future__ import annotations

import numpy as np
from scipy.stats import binom

from ..graph_core import Graph
from ..product_walk import DENSE_MAX_N
from .config import PipelineConfig


def exact_consistency_fraction(g: Graph, h: Graph, x) -> float:
    n = g.n
    if n > DENSE_MAX_N:
        raise ValueError(f"exact consistency limited to n <= {DENSE_MAX_N}, got n={n}")
    i, j = x
    gi = np.delete(g.matrix[i], i)
    hj = np.delete(h.matrix[j], j)
    consistent = (gi[:, None] == hj[None, :]).sum()
    return float(consistent) / (n - 1) ** 2


def exact_consistency_table(g: Graph, h: Graph) -> np.ndarray:
    """Exact score for all ``n^2`` product vertices, flattened as ``i * n + j``."""
    n = g.n
    m = n - 1
    a = g.degrees().astype(float)
    b = h.degrees().astype(float)
    count = np.outer(a, b) + np.outer(m - a, m - b)
    return (count / m**2).reshape(-1)


def marked_mask(g: Graph, h: Graph, cfg: PipelineConfig) -> np.ndarray:
    """Exact marking predicate: score strictly above the threshold."""
    return exact_consistency_table(g, h) > cfg.threshold


def _sample_eligible(n: int, i: int, j: int, r: int, rng: np.random.Generator):
    ip = rng.integers(0, n - 1, size=r)
    jp = rng.integers(0, n - 1, size=r)
    ip = ip + (ip >= i)
    jp = jp + (jp >= j)
    return ip, jp


def marking_check(counter, g: Graph, h: Graph, x, cfg: PipelineConfig, rng: np.random.Generator) -> bool:
    """Sampled marking oracle: ``r`` eligible pairs, two classical reads each."""
    n = g.n
    i, j = x
    ip, jp = _sample_eligible(n, i, j, cfg.r, rng)
    a = counter.read_many("G", np.full(cfg.r, i), ip)
    b = counter.read_many("H", np.full(cfg.r, j), jp)
    return int(np.sum(a == b)) > cfg.threshold * cfg.r


def marking_pass_probability(g: Graph, h: Graph, cfg: PipelineConfig) -> np.ndarray:
    """Exact probability that :func:`marking_check` accepts each product vertex.

    Samples are drawn with replacement, so the consistent count is
    ``Binomial(r, f_x)`` with ``f_x`` the exact score.
    """
    f = exact_consistency_table(g, h)
    need = int(np.floor(cfg.threshold * cfg.r))  # pass iff count > threshold * r
    return binom.sf(need, cfg.r, f)
