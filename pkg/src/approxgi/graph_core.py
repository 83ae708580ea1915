"""Graphs, permutations, edit distances and the correlated instance generators.

Adjacency is kept as a flat boolean vector over the upper triangle, pairs
indexed row-major over ``u < v``.  Everything stochastic takes an explicit
``numpy.random.Generator`` so tables can be regenerated bit for bit.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

BRUTE_FORCE_MAX_N = 10


def make_rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def split_rng(rng: np.random.Generator, k: int) -> list:
    """Independent child streams of ``rng`` (advances the parent)."""
    return list(rng.spawn(k))


def num_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(n: int, u: int, v: int) -> int:
    if u == v:
        raise ValueError("self-loop pair has no index")
    if u > v:
        u, v = v, u
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


_TRIU_CACHE: dict = {}


def triu_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-major (u, v) arrays of all pairs u < v."""
    if n not in _TRIU_CACHE:
        iu, iv = np.triu_indices(n, k=1)
        iu.setflags(write=False)
        iv.setflags(write=False)
        _TRIU_CACHE[n] = (iu, iv)
    return _TRIU_CACHE[n]


class Graph:
    """Simple undirected graph on vertices ``0..n-1``."""

    __slots__ = ("n", "bits", "_matrix")

    def __init__(self, n: int, bits: Optional[np.ndarray] = None):
        if n < 1:
            raise ValueError(f"graph size must be positive, got {n}")
        self.n = int(n)
        if bits is None:
            bits = np.zeros(num_pairs(n), dtype=bool)
        bits = np.asarray(bits, dtype=bool).copy()
        if bits.shape != (num_pairs(n),):
            raise ValueError("bit vector length does not match n")
        bits.setflags(write=False)
        self.bits = bits
        self._matrix = None

    @classmethod
    def from_matrix(cls, a) -> "Graph":
        a = np.asarray(a, dtype=bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if np.any(np.diag(a)):
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        iu, iv = triu_pairs(a.shape[0])
        return cls(a.shape[0], a[iu, iv])

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        bits = np.zeros(num_pairs(n), dtype=bool)
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            bits[pair_index(n, u, v)] = True
        return cls(n, bits)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, np.ones(num_pairs(n), dtype=bool))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n)

    @property
    def matrix(self) -> np.ndarray:
        """Dense symmetric boolean adjacency (read-only, cached)."""
        if self._matrix is None:
            a = np.zeros((self.n, self.n), dtype=bool)
            iu, iv = triu_pairs(self.n)
            a[iu, iv] = self.bits
            a[iv, iu] = self.bits
            a.setflags(write=False)
            self._matrix = a
        return self._matrix

    def adj(self, u: int, v: int) -> bool:
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise IndexError(f"vertex out of range for n={self.n}")
        return bool(self.bits[pair_index(self.n, u, v)])

    @property
    def num_edges(self) -> int:
        return int(self.bits.sum())

    def degrees(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def edges(self) -> list[tuple[int, int]]:
        iu, iv = triu_pairs(self.n)
        return [(int(u), int(v)) for u, v in zip(iu[self.bits], iv[self.bits])]

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash((self.n, self.bits.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.num_edges})"

    def to_text(self) -> str:
        lines = [str(self.n)] + [f"{u} {v}" for u, v in self.edges()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows or len(rows[0]) != 1:
            raise ValueError("first line must hold the vertex count")
        n = int(rows[0][0])
        edges = []
        for r in rows[1:]:
            if len(r) != 2:
                raise ValueError(f"malformed edge line: {' '.join(r)!r}")
            u, v = int(r[0]), int(r[1])
            if u >= v:
                raise ValueError(f"edge lines need u < v, got {u} {v}")
            edges.append((u, v))
        return cls.from_edges(n, edges)


class Permutation:
    """Bijection on ``0..n-1``; ``p(i)`` is the image of ``i``."""

    __slots__ = ("image",)

    def __init__(self, image: Sequence[int]):
        img = np.asarray(image, dtype=np.int64).copy()
        n = img.shape[0]
        if img.ndim != 1 or not np.array_equal(np.sort(img), np.arange(n)):
            raise ValueError("image is not a bijection on 0..n-1")
        img.setflags(write=False)
        self.image = img

    @property
    def n(self) -> int:
        return int(self.image.shape[0])

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        return cls(rng.permutation(n))

    def __call__(self, i: int) -> int:
        return int(self.image[i])

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.image)
        inv[self.image] = np.arange(self.n)
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """``self ∘ other``: apply ``other`` first."""
        return Permutation(self.image[other.image])

    def tolist(self) -> list[int]:
        return [int(x) for x in self.image]

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self.image, other.image)

    def __hash__(self) -> int:
        return hash(self.image.tobytes())

    def __repr__(self) -> str:
        return f"Permutation({self.tolist()})"


def _check_sizes(g: Graph, h: Graph, pi: Optional[Permutation] = None) -> None:
    if g.n != h.n:
        raise ValueError(f"size mismatch: {g.n} vs {h.n}")
    if pi is not None and pi.n != g.n:
        raise ValueError(f"permutation size {pi.n} does not match n={g.n}")


def gen_gnp(n: int, p: float, rng: np.random.Generator) -> Graph:
    if n < 1:
        raise ValueError(f"graph size must be positive, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0,1], got {p}")
    return Graph(n, rng.random(num_pairs(n)) < p)


def apply_permutation(g: Graph, pi: Permutation) -> Graph:
    """Relabel ``g`` so that the output has edge {pi(u), pi(v)} iff g has {u, v}."""
    if pi.n != g.n:
        raise ValueError(f"permutation size {pi.n} does not match n={g.n}")
    out = np.zeros((g.n, g.n), dtype=bool)
    img = pi.image
    out[np.ix_(img, img)] = g.matrix
    return Graph.from_matrix(out)


@dataclass
class Instance:
    g: Graph
    h: Graph
    label: str
    epsilon: float
    seed: int
    planted: Optional[Permutation] = None
    planted_edits: Optional[int] = None

    def __post_init__(self):
        _check_sizes(self.g, self.h)
        if self.label not in ("YES", "NO"):
            raise ValueError(f"label must be YES or NO, got {self.label!r}")
        if self.label == "YES" and self.planted is None:
            raise ValueError("YES instance needs a planted permutation")

    @property
    def n(self) -> int:
        return self.g.n

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "epsilon": self.epsilon,
            "label": self.label,
            "seed": self.seed,
            "planted": None if self.planted is None else self.planted.tolist(),
            "g_edges": [list(e) for e in self.g.edges()],
            "h_edges": [list(e) for e in self.h.edges()],
            "planted_edits": self.planted_edits,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Instance":
        n = int(d["n"])
        planted = d.get("planted")
        return cls(
            g=Graph.from_edges(n, d["g_edges"]),
            h=Graph.from_edges(n, d["h_edges"]),
            label=d["label"],
            epsilon=float(d["epsilon"]),
            seed=int(d["seed"]),
            planted=None if planted is None else Permutation(planted),
            planted_edits=d.get("planted_edits"),
        )

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        return cls.from_dict(json.loads(text))


def _seed_of(rng: np.random.Generator) -> int:
    # Recorded for provenance only; regeneration goes through the caller's stream.
    return int(rng.integers(0, 2**63 - 1))


def gen_yes_instance(n: int, epsilon: float, rng: np.random.Generator) -> Instance:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0,1), got {epsilon}")
    seed = _seed_of(rng)
    g = gen_gnp(n, 0.5, rng)
    pi = Permutation.random(n, rng)
    h0 = apply_permutation(g, pi)
    flips = rng.random(num_pairs(n)) < epsilon / 2
    h = Graph(n, h0.bits ^ flips)
    return Instance(g, h, "YES", float(epsilon), seed, pi, int(flips.sum()))


def gen_no_instance(n: int, rng: np.random.Generator, epsilon: float = 0.05) -> Instance:
    seed = _seed_of(rng)
    g = gen_gnp(n, 0.5, rng)
    h = gen_gnp(n, 0.5, rng)
    return Instance(g, h, "NO", float(epsilon), seed)


def mismatch_vector(g: Graph, h: Graph, pi: Permutation) -> np.ndarray:
    """Per-pair disagreement, indexed like ``g.bits``."""
    _check_sizes(g, h, pi)
    iu, iv = triu_pairs(g.n)
    return g.bits != h.matrix[pi.image[iu], pi.image[iv]]


def edit_distance_under(g: Graph, h: Graph, pi: Permutation) -> int:
    return int(mismatch_vector(g, h, pi).sum())


def min_edit_distance_bruteforce(g: Graph, h: Graph) -> tuple[int, Permutation]:
    """Exact ``min_pi ed_pi(g, h)``; ties go to the lexicographically smallest pi."""
    _check_sizes(g, h)
    n = g.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got n={n}")
    if n == 1:
        return 0, Permutation.identity(1)
    iu, iv = triu_pairs(n)
    hm = h.matrix
    gb = g.bits
    best, best_perm = None, None
    # itertools yields permutations in lexicographic order, so argmin's first hit wins ties.
    perms_iter = itertools.permutations(range(n))
    chunk = 200_000
    while True:
        block = np.array(list(itertools.islice(perms_iter, chunk)), dtype=np.int8)
        if block.size == 0:
            break
        cost = (hm[block[:, iu], block[:, iv]] != gb).sum(axis=1)
        k = int(np.argmin(cost))
        if best is None or cost[k] < best:
            best, best_perm = int(cost[k]), block[k]
    return best, Permutation(best_perm)


def defect_profile(g: Graph, h: Graph, pi: Permutation) -> np.ndarray:
    _check_sizes(g, h, pi)
    hp = h.matrix[np.ix_(pi.image, pi.image)]
    return (g.matrix != hp).sum(axis=1)


def laplacian_spectrum(g: Graph) -> np.ndarray:
    a = g.matrix.astype(float)
    lap = np.diag(a.sum(axis=1)) - a
    return np.sort(np.linalg.eigvalsh(lap))


def high_defect_vertices(profile: np.ndarray, k: int) -> np.ndarray:
    """Vertices whose defect reaches ``sqrt(k)`` (none when k = 0)."""
    profile = np.asarray(profile)
    if k <= 0:
        return np.flatnonzero(profile > 0)
    return np.flatnonzero(profile >= math.sqrt(k))
