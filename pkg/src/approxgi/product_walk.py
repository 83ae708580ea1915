"""Compatibility product graph and the lazy walk on it.

Product vertex ``(i, j)`` pairs vertex ``i`` of G with vertex ``j`` of H and
is flattened to ``x = i * n + j``.  Two product vertices are adjacent when
they are injective (``i1 != i2`` and ``j1 != j2``) and edge-consistent
(``A_G[i1, i2] == A_H[j1, j2]``).

The lazy chain picks a uniformly random eligible ``(i', j')`` and moves there
if it is adjacent, all with probability 1/2; every other outcome stays put.
Off-diagonal entries are therefore ``1 / (2 (n-1)^2)`` on edges.  ``P`` is
symmetric, so the uniform distribution on the ``n^2`` states is stationary.

Per-transition queries (``transition_prob``) never build a matrix.  The dense
helpers below are for diagnostics and refuse ``n > 20``.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .graph_core import (
    Graph,
    Permutation,
    edit_distance_under,
    min_edit_distance_bruteforce,
    num_pairs,
    triu_pairs,
)

DENSE_MAX_N = 20
OVERLAP_MAX_N = 7


class ProductVertex(NamedTuple):
    i: int
    j: int

    def flat(self, n: int) -> int:
        return self.i * n + self.j


def unflatten(x: int, n: int) -> ProductVertex:
    return ProductVertex(int(x) // n, int(x) % n)


def _guard(n: int, limit: int = DENSE_MAX_N) -> None:
    if n > limit:
        raise ValueError(f"dense product-chain diagnostics are limited to n <= {limit}, got n={n}")


def product_adjacent(x, y, g: Graph, h: Graph) -> bool:
    (i1, j1), (i2, j2) = x, y
    if i1 == i2 or j1 == j2:
        return False
    return g.adj(i1, i2) == h.adj(j1, j2)


def transition_prob(x, y, g: Graph, h: Graph) -> Fraction:
    """Exact transition probability ``P(x, y)`` as a rational."""
    n = g.n
    denom = 2 * (n - 1) ** 2
    if tuple(x) != tuple(y):
        return Fraction(1, denom) if product_adjacent(x, y, g, h) else Fraction(0)
    return 1 - Fraction(product_degree(x, g, h), denom)


def product_degree(x, g: Graph, h: Graph) -> int:
    i, j = x
    gi = np.delete(g.matrix[i], i)
    hj = np.delete(h.matrix[j], j)
    a, b = int(gi.sum()), int(hj.sum())
    m = g.n - 1
    return a * b + (m - a) * (m - b)


def product_adjacency(g: Graph, h: Graph) -> np.ndarray:
    """Dense ``n^2 x n^2`` boolean adjacency of the product graph."""
    n = g.n
    _guard(n)
    eq = g.matrix[:, None, :, None] == h.matrix[None, :, None, :]
    idx = np.arange(n)
    eq[idx, :, idx, :] = False
    eq[:, idx, :, idx] = False
    return eq.reshape(n * n, n * n)


def transition_counts(g: Graph, h: Graph) -> np.ndarray:
    """Integer matrix ``K = 2 (n-1)^2 P`` (exact)."""
    n = g.n
    adj = product_adjacency(g, h).astype(np.int64)
    k = adj.copy()
    k[np.diag_indices_from(k)] = 2 * (n - 1) ** 2 - adj.sum(axis=1)
    return k


def transition_matrix(g: Graph, h: Graph) -> np.ndarray:
    n = g.n
    if n == 1:
        return np.ones((1, 1))
    return transition_counts(g, h) / (2 * (n - 1) ** 2)


def verify_detailed_balance(g: Graph, h: Graph) -> float:
    """Max ``|mu(x) P(x,y) - mu(y) P(y,x)|`` under the uniform ``mu``.

    Evaluated in integer arithmetic on ``2 (n-1)^2 P`` and converted once, so
    the result is exact.
    """
    n = g.n
    _guard(n)
    if n == 1:
        return 0.0
    k = transition_counts(g, h)
    worst = int(np.abs(k - k.T).max())
    return float(Fraction(worst, 2 * (n - 1) ** 2 * n * n))


@dataclass
class ChainSpectrum:
    eigenvalues: np.ndarray
    spectral_gap: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["index", "eigenvalue"])
        for k, lam in enumerate(self.eigenvalues):
            wr.writerow([k, repr(float(lam))])
        return buf.getvalue()


def chain_spectrum(g: Graph, h: Graph) -> ChainSpectrum:
    _guard(g.n)
    lam = np.sort(np.linalg.eigvalsh(transition_matrix(g, h)))
    gap = 1.0 - lam[-2] if lam.size > 1 else 1.0
    return ChainSpectrum(lam, float(gap))


def matching_set(pi: Permutation) -> list[ProductVertex]:
    return [ProductVertex(i, int(pi.image[i])) for i in range(pi.n)]


def matching_indices(pi: Permutation) -> np.ndarray:
    n = pi.n
    return np.arange(n) * n + pi.image


def matching_density(g: Graph, h: Graph, pi: Permutation) -> float:
    c = num_pairs(g.n)
    if c == 0:
        return 1.0
    return 1.0 - edit_distance_under(g, h, pi) / c


def internal_degrees(g: Graph, h: Graph, pi: Permutation) -> np.ndarray:
    """Degree of each ``(i, pi(i))`` inside the product subgraph on M_pi."""
    n = g.n
    out = np.zeros(n, dtype=int)
    for i in range(n):
        out[i] = sum(
            product_adjacent((i, pi(i)), (k, pi(k)), g, h) for k in range(n) if k != i
        )
    return out


@dataclass
class OverlapReport:
    n: int
    epsilon: float
    optimum: int
    optimal_perm: Permutation
    budget: float
    bound: float
    passing: int
    violations: list = field(default_factory=list)

    @property
    def promise_holds(self) -> bool:
        return self.optimum <= self.budget

    @property
    def ok(self) -> bool:
        return not self.violations


def overlap_property_check(g: Graph, h: Graph, epsilon: float) -> OverlapReport:
    """Check that dense permutation-shaped sets overlap the optimal matching.

    With budget ``k = eps * C(n,2)``, every ``sigma`` whose matching set has
    density ``>= 1 - 2 eps`` should agree with the brute-force optimum on at
    least ``n - 4 sqrt(k)`` vertices.  All ``n!`` permutations are scanned and
    offenders are listed as ``(sigma, agreement, ed_sigma)``.
    """
    n = g.n
    if n > OVERLAP_MAX_N:
        raise ValueError(f"overlap enumeration limited to n <= {OVERLAP_MAX_N}, got n={n}")
    opt, best = min_edit_distance_bruteforce(g, h)
    c = num_pairs(n)
    budget = epsilon * c
    bound = n - 4 * math.sqrt(budget)
    report = OverlapReport(n, epsilon, opt, best, budget, bound, 0)
    iu, iv = triu_pairs(n)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    cost = (h.matrix[perms[:, iu], perms[:, iv]] != g.bits).sum(axis=1)
    agree = (perms == best.image).sum(axis=1)
    # density >= 1 - 2 eps  <=>  ed_sigma <= 2 eps C(n,2)
    dense = cost <= 2 * budget + 1e-9
    report.passing = int(dense.sum())
    for p, a, e in zip(perms[dense], agree[dense], cost[dense]):
        if a < bound - 1e-9:
            report.violations.append((Permutation(p), int(a), int(e)))
    return report
