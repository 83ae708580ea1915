"""Query-counted access to the two adjacency oracles.

Classical reads go through :meth:`QueryCounter.read` and land in the
transcript.  Quantum subroutines are simulated with full knowledge of the
graphs, so they never read; they call :meth:`QueryCounter.charge_coherent`
with the number of oracle uses the subroutine would make.
"""
from __future__ import annotations

import csv
import io
from typing import Iterator, NamedTuple, Optional

import numpy as np

from .graph_core import Graph, Permutation, pair_index

ORACLES = ("G", "H")


class TranscriptEntry(NamedTuple):
    step_index: int
    which: str
    pair: tuple[int, int]
    answer: int


class Transcript:
    """Ordered record of classical reads, stored column-wise."""

    def __init__(self):
        self._which: list[int] = []  # 0 for G, 1 for H
        self._u: list[int] = []
        self._v: list[int] = []
        self._ans: list[int] = []

    def __len__(self) -> int:
        return len(self._ans)

    def append(self, which: str, u: int, v: int, answer: int) -> None:
        if u > v:
            u, v = v, u
        self._which.append(ORACLES.index(which))
        self._u.append(int(u))
        self._v.append(int(v))
        self._ans.append(int(answer))

    def extend(self, which: str, us, vs, answers) -> None:
        us = np.asarray(us)
        vs = np.asarray(vs)
        lo, hi = np.minimum(us, vs), np.maximum(us, vs)
        self._which.extend([ORACLES.index(which)] * len(lo))
        self._u.extend(lo.tolist())
        self._v.extend(hi.tolist())
        self._ans.extend(np.asarray(answers, dtype=int).tolist())

    def __iter__(self) -> Iterator[TranscriptEntry]:
        for k in range(len(self)):
            yield self[k]

    def __getitem__(self, k: int) -> TranscriptEntry:
        return TranscriptEntry(k, ORACLES[self._which[k]], (self._u[k], self._v[k]), self._ans[k])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Transcript)
            and self._which == other._which
            and self._u == other._u
            and self._v == other._v
            and self._ans == other._ans
        )

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.asarray(self._which, dtype=np.int8),
            np.asarray(self._u, dtype=np.int64),
            np.asarray(self._v, dtype=np.int64),
            np.asarray(self._ans, dtype=np.int8),
        )

    def queried_pairs(self, which: str) -> set[tuple[int, int]]:
        w = ORACLES.index(which)
        return {(u, v) for k, u, v in zip(self._which, self._u, self._v) if k == w}

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["step", "oracle", "u", "v", "answer"])
        for e in self:
            wr.writerow([e.step_index, e.which, e.pair[0], e.pair[1], e.answer])
        return buf.getvalue()


class QueryBudgetExceeded(RuntimeError):
    pass


class QueryCounter:
    """Per-run oracle session over a fixed pair of graphs.

    ``cache=True`` answers repeated classical reads from memory without
    charging them again; it is off by default because the query model counts
    every repetition.  ``h_budget`` optionally caps classical H reads.
    """

    def __init__(self, g: Graph, h: Graph, cache: bool = False, h_budget: Optional[int] = None):
        if g.n != h.n:
            raise ValueError(f"size mismatch: {g.n} vs {h.n}")
        self.g = g
        self.h = h
        self.n = g.n
        self.classical_g = 0
        self.classical_h = 0
        self.coherent_g = 0
        self.coherent_h = 0
        self.transcript = Transcript()
        self.cache = cache
        self.h_budget = h_budget
        self._memo: dict = {}

    def _graph(self, which: str) -> Graph:
        if which == "G":
            return self.g
        if which == "H":
            return self.h
        raise ValueError(f"oracle must be 'G' or 'H', got {which!r}")

    def _check_pair(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError(f"self-loop query ({u},{u}) is not allowed")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise IndexError(f"vertex out of range for n={self.n}")

    def _count(self, which: str, k: int) -> None:
        if which == "G":
            self.classical_g += k
        else:
            if self.h_budget is not None and self.classical_h + k > self.h_budget:
                raise QueryBudgetExceeded(f"H budget {self.h_budget} exceeded")
            self.classical_h += k

    def read(self, which: str, u: int, v: int) -> int:
        g = self._graph(which)
        self._check_pair(u, v)
        if self.cache:
            key = (which, min(u, v), max(u, v))
            if key in self._memo:
                return self._memo[key]
        self._count(which, 1)
        ans = int(g.bits[pair_index(self.n, u, v)])
        self.transcript.append(which, u, v, ans)
        if self.cache:
            self._memo[key] = ans
        return ans

    def read_many(self, which: str, us, vs) -> np.ndarray:
        """Vectorised sequence of reads, recorded in the given order."""
        g = self._graph(which)
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        if us.size == 0:
            return np.zeros(0, dtype=np.int8)
        if np.any(us == vs):
            raise ValueError("self-loop query is not allowed")
        if us.min() < 0 or vs.min() < 0 or us.max() >= self.n or vs.max() >= self.n:
            raise IndexError(f"vertex out of range for n={self.n}")
        if self.cache:
            return np.array([self.read(which, int(a), int(b)) for a, b in zip(us, vs)], dtype=np.int8)
        self._count(which, us.size)
        ans = g.matrix[us, vs].astype(np.int8)
        self.transcript.extend(which, us, vs, ans)
        return ans

    def charge_coherent(self, which: str, amount: int) -> None:
        if amount < 0:
            raise ValueError("coherent charge must be nonnegative")
        self._graph(which)
        if which == "G":
            self.coherent_g += int(amount)
        else:
            self.coherent_h += int(amount)

    def charge_pair(self, amount_each: int) -> None:
        """Charge ``amount_each`` coherent uses to both oracles."""
        self.charge_coherent("G", amount_each)
        self.charge_coherent("H", amount_each)

    @property
    def classical_total(self) -> int:
        return self.classical_g + self.classical_h

    @property
    def coherent_total(self) -> int:
        return self.coherent_g + self.coherent_h

    @property
    def total(self) -> int:
        return self.classical_total + self.coherent_total

    def as_dict(self) -> dict:
        return {
            "classical_g": self.classical_g,
            "classical_h": self.classical_h,
            "coherent_g": self.coherent_g,
            "coherent_h": self.coherent_h,
        }


def read(counter: QueryCounter, which: str, u: int, v: int) -> int:
    return counter.read(which, u, v)


def charge_coherent(counter: QueryCounter, which: str, amount: int) -> None:
    counter.charge_coherent(which, amount)


def collision_count(transcript: Transcript, pi: Permutation) -> int:
    """H-reads whose preimage pair under ``pi`` was read from G earlier."""
    inv = pi.inverse().image
    seen: set = set()
    hits = 0
    for e in transcript:
        a, b = e.pair
        if e.which == "G":
            seen.add((a, b))
        else:
            x, y = int(inv[a]), int(inv[b])
            if (min(x, y), max(x, y)) in seen:
                hits += 1
    return hits
