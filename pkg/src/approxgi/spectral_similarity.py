"""Laplacian spectral distance and a sampled phase-estimation model of it."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph_core import Graph, laplacian_spectrum

SPECTRUM_HEADER = ["index", "true_lambda", "estimated_lambda"]


def spectral_distance(g: Graph, h: Graph) -> float:
    """Euclidean distance between the ascending Laplacian spectra."""
    if g.n != h.n:
        raise ValueError(f"size mismatch: {g.n} vs {h.n}")
    return float(np.linalg.norm(laplacian_spectrum(g) - laplacian_spectrum(h)))


@dataclass(frozen=True)
class SpectralConfig:
    alpha: float
    beta: float
    eta: float
    shots: int

    def __post_init__(self):
        if not 0 <= self.alpha < self.beta:
            raise ValueError(f"need 0 <= alpha < beta, got {self.alpha}, {self.beta}")
        if self.eta <= 0:
            raise ValueError("eta must be positive")

    @classmethod
    def for_n(cls, n: int, alpha: float, beta: float, eta: Optional[float] = None, shots: Optional[int] = None) -> "SpectralConfig":
        eta = (beta - alpha) / (4 * math.sqrt(n)) if eta is None else eta
        shots = max(n, math.ceil(4 * n * math.log(n))) if shots is None else shots
        if shots < n:
            raise ValueError(f"shots must be at least n = {n}")
        return cls(alpha, beta, eta, int(shots))

    @property
    def cutoff(self) -> float:
        return (self.alpha + self.beta) / 2

    @property
    def cost_per_shot(self) -> int:
        return math.ceil(1 / self.eta)


def grid_round(x, eta: float):
    """Nearest multiple of ``eta``; exact midpoints round down."""
    return eta * np.ceil(np.asarray(x, dtype=float) / eta - 0.5)


@dataclass
class SpectrumEstimate:
    true: np.ndarray
    per_index: np.ndarray  # grid estimate of eigenvalue i, before sorting
    flagged: np.ndarray  # index never sampled, filled from a neighbour

    @property
    def estimates(self) -> np.ndarray:
        return np.sort(self.per_index)

    @property
    def any_flagged(self) -> bool:
        return bool(self.flagged.any())

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(SPECTRUM_HEADER)
        for i, (a, b) in enumerate(zip(self.true, self.per_index)):
            wr.writerow([i, f"{a:.10g}", f"{b:.10g}"])
        return buf.getvalue()


def qpe_spectrum_sample(g: Graph, cfg: SpectralConfig, rng: np.random.Generator) -> SpectrumEstimate:
    """Repeated phase estimation with a uniformly random eigenvector per shot.

    Indices never drawn take the estimate of the nearest drawn index (lower
    index on ties) and are flagged.
    """
    lam = laplacian_spectrum(g)
    n = lam.size
    hit = np.zeros(n, dtype=bool)
    hit[rng.integers(0, n, size=cfg.shots)] = True
    rounded = grid_round(lam, cfg.eta)
    seen = np.flatnonzero(hit)
    per = rounded.copy()
    for i in np.flatnonzero(~hit):
        near = seen[np.argmin(np.abs(seen - i))]
        per[i] = rounded[near]
    return SpectrumEstimate(lam, per, ~hit)


@dataclass
class SpectralVerdict:
    answer: str
    distance_estimate: float
    charge: int
    flagged: bool


def spectral_decide(g: Graph, h: Graph, cfg: SpectralConfig, rng: np.random.Generator, counter=None) -> SpectralVerdict:
    """YES iff the distance between sampled spectra is at most ``(alpha+beta)/2``.

    Charges ``shots * ceil(1/eta)`` coherent uses per graph.
    """
    if g.n != h.n:
        raise ValueError(f"size mismatch: {g.n} vs {h.n}")
    eg = qpe_spectrum_sample(g, cfg, rng)
    eh = qpe_spectrum_sample(h, cfg, rng)
    each = cfg.shots * cfg.cost_per_shot
    if counter is not None:
        counter.charge_coherent("G", each)
        counter.charge_coherent("H", each)
    d = float(np.linalg.norm(eg.estimates - eh.estimates))
    return SpectralVerdict("YES" if d <= cfg.cutoff else "NO", d, 2 * each, eg.any_flagged or eh.any_flagged)
