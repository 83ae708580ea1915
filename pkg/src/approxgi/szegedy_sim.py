"""Statevector simulation of the Szegedy walk on the product chain.

The edge space is ``C^N (x) C^N`` with ``N = n^2``; a state is stored as an
``N x N`` complex array whose row ``x`` is the block of amplitudes with first
register ``x``.  With ``C[x, y] = sqrt(P(x, y))``:

* ``ref(A)`` reflects each row about ``C[x, :]``:
  ``row <- 2 <C[x,:], row> C[x,:] - row``;
* ``ref(B)`` does the same to each column, which is the row update applied to
  the transposed layout because ``P`` is symmetric.

One walk step is ``W = ref(B) ref(A)`` and costs one query to each oracle.
Its eigenphases on the invariant subspace are ``+-2 arccos(lambda)``, a full
rotation by twice the angle between the two subspaces.  The swap-based half
step ``S ref(A)`` squares to ``W`` and carries ``+-arccos(lambda)``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph_core import Graph, Permutation
from .product_walk import (
    DENSE_MAX_N,
    matching_indices,
    transition_counts,
)

EIGENPHASE_MAX_N = 6


class WalkOperator:
    """Coin table ``sqrt(P)`` for one (G, H) pair.

    The table has ``n^4`` entries, the same footprint as one edge state, and
    is built once per pair.
    """

    def __init__(self, g: Graph, h: Graph):
        n = g.n
        if n > DENSE_MAX_N:
            raise ValueError(f"walk simulation limited to n <= {DENSE_MAX_N}, got n={n}")
        if n < 2:
            raise ValueError("walk needs at least two vertices")
        k = transition_counts(g, h)
        if not np.array_equal(k, k.T):
            # ref(B) below reuses the row coin for columns; that needs P = P^T.
            raise AssertionError("product chain is not symmetric")
        self.g = g
        self.h = h
        self.n = n
        self.N = n * n
        self.coin = np.sqrt(k / (2.0 * (n - 1) ** 2))
        self.coin.setflags(write=False)

    def ref_a(self, amps: np.ndarray) -> np.ndarray:
        c = np.einsum("xy,xy->x", self.coin, amps)
        return 2.0 * c[:, None] * self.coin - amps

    def ref_b(self, amps: np.ndarray) -> np.ndarray:
        return self.ref_a(amps.T).T

    def step(self, amps: np.ndarray) -> np.ndarray:
        return self.ref_b(self.ref_a(amps))

    def half_step(self, amps: np.ndarray) -> np.ndarray:
        """Register swap after ``ref(A)``; two half steps make one :meth:`step`."""
        return self.ref_a(amps).T


@dataclass
class EdgeState:
    n: int
    amps: np.ndarray  # shape (n^2, n^2), complex

    @property
    def vector(self) -> np.ndarray:
        return self.amps.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "EdgeState":
        return EdgeState(self.n, self.amps.copy())


def _operator(g: Graph, h: Graph, op: Optional[WalkOperator]) -> WalkOperator:
    if op is not None:
        return op
    return WalkOperator(g, h)


def psi_block(x, g: Graph, h: Graph, op: Optional[WalkOperator] = None) -> np.ndarray:
    """Second-register amplitudes ``sqrt(P(x, .))`` of ``|psi_x>``."""
    op = _operator(g, h, op)
    i, j = x
    return op.coin[i * op.n + j].astype(complex)


def stationary_edge_state(g: Graph, h: Graph, op: Optional[WalkOperator] = None) -> EdgeState:
    """``sum_x sqrt(mu(x)) |x>|psi_x>`` with the uniform ``mu``."""
    op = _operator(g, h, op)
    return EdgeState(op.n, op.coin.astype(complex) / op.n)


def vertex_edge_state(x, g: Graph, h: Graph, op: Optional[WalkOperator] = None) -> EdgeState:
    """``|x>|psi_x>``: all weight on first register ``x``."""
    op = _operator(g, h, op)
    amps = np.zeros((op.N, op.N), dtype=complex)
    k = x[0] * op.n + x[1]
    amps[k] = op.coin[k]
    return EdgeState(op.n, amps)


def apply_walk(state: EdgeState, g: Graph, h: Graph, counter=None, op: Optional[WalkOperator] = None) -> EdgeState:
    op = _operator(g, h, op)
    if counter is not None:
        counter.charge_coherent("G", 1)
        counter.charge_coherent("H", 1)
    return EdgeState(state.n, op.step(state.amps))


def reflect_marked(state: EdgeState, marked, counter=None, r: int = 0) -> EdgeState:
    """Flip the sign of every block whose first register is marked.

    ``marked`` is a boolean mask over the ``n^2`` product vertices or an
    iterable of ``(i, j)`` pairs.  Charges ``r`` uses of each oracle.
    """
    mask = marked_mask(marked, state.n)
    if counter is not None:
        counter.charge_coherent("G", r)
        counter.charge_coherent("H", r)
    amps = state.amps.copy()
    amps[mask] *= -1
    return EdgeState(state.n, amps)


def marked_mask(marked, n: int) -> np.ndarray:
    if isinstance(marked, np.ndarray) and marked.dtype == bool:
        if marked.shape != (n * n,):
            raise ValueError("marked mask has the wrong length")
        return marked
    mask = np.zeros(n * n, dtype=bool)
    for i, j in marked:
        mask[i * n + j] = True
    return mask


def measure_first_register(state: EdgeState) -> np.ndarray:
    """Marginal distribution of the first register (length ``n^2``)."""
    p = np.einsum("xy,xy->x", state.amps.conj(), state.amps).real
    return p


def sample_first_register(state: EdgeState, rng: np.random.Generator) -> tuple[int, int]:
    p = measure_first_register(state)
    x = int(rng.choice(p.size, p=p / p.sum()))
    return divmod(x, state.n)


def full_walk_matrix(g: Graph, h: Graph) -> np.ndarray:
    """Dense ``n^4 x n^4`` unitary, built column by column from :func:`apply_walk`."""
    if g.n > EIGENPHASE_MAX_N:
        raise ValueError(f"dense walk unitary limited to n <= {EIGENPHASE_MAX_N}, got n={g.n}")
    op = WalkOperator(g, h)
    d = op.N * op.N
    eye = np.eye(d, dtype=complex)
    cols = [op.step(eye[:, k].reshape(op.N, op.N)).reshape(-1) for k in range(d)]
    return np.stack(cols, axis=1)


def _invariant_basis(op: WalkOperator, tol: float = 1e-7) -> np.ndarray:
    """Orthonormal basis of span{|psi_x>} + span{|phi_y>}."""
    N = op.N
    d = N * N
    cols = np.zeros((d, 2 * N))
    for x in range(N):
        cols[x * N:(x + 1) * N, x] = op.coin[x]
    for y in range(N):
        cols[y::N, N + y] = op.coin[:, y]
    u, sv, _ = np.linalg.svd(cols, full_matrices=False)
    return u[:, sv > tol]


def walk_eigenphases(g: Graph, h: Graph, half_step: bool = False) -> np.ndarray:
    """Sorted eigenphases on the invariant subspace ``A + B``, in ``(-pi, pi]``.

    By default these are the phases of the full step ``W``; ``half_step=True``
    uses ``S ref(A)`` instead.  Both operators act trivially on the orthogonal
    complement of ``A + B``, which is left out.
    """
    if g.n > EIGENPHASE_MAX_N:
        raise ValueError(f"eigenphase diagnostics limited to n <= {EIGENPHASE_MAX_N}, got n={g.n}")
    op = WalkOperator(g, h)
    apply = op.half_step if half_step else op.step
    q = _invariant_basis(op)
    N = op.N
    wq = np.stack([apply(q[:, k].reshape(N, N).astype(complex)).reshape(-1) for k in range(q.shape[1])], axis=1)
    restricted = q.conj().T @ wq
    return np.sort(np.angle(np.linalg.eigvals(restricted)))


def arccos_phases(eigenvalues, multiple: int = 1, tol: float = 1e-12) -> np.ndarray:
    """Multiset ``{+-multiple * arccos(lambda)}`` wrapped to ``(-pi, pi]``.

    ``lambda = 1`` contributes a single phase 0 (and ``lambda = -1`` a single
    ``multiple * pi``), matching the dimension of ``A + B``.
    """
    out = []
    for lam in eigenvalues:
        if lam > 1 - tol:
            out.append(0.0)
        elif lam < -1 + tol:
            out.append(multiple * math.pi)
        else:
            t = multiple * math.acos(lam)
            out.extend([t, -t])
    wrapped = np.angle(np.exp(1j * np.array(out)))
    wrapped[np.isclose(wrapped, -math.pi)] = math.pi
    return np.sort(wrapped)


def phase_gap(phases: np.ndarray, tol: float = 1e-9) -> float:
    nz = np.abs(phases)[np.abs(phases) > tol]
    return float(nz.min()) if nz.size else math.pi


def depolarized_prob(p_ideal: float, T: int, p_err: float, gates_per_step: int, target_fraction: float) -> float:
    """Global-depolarising mixture after ``T`` steps of ``gates_per_step`` gates."""
    for name, val in (("p_ideal", p_ideal), ("p_err", p_err), ("target_fraction", target_fraction)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"{name} must lie in [0,1], got {val}")
    if T < 0 or gates_per_step < 0:
        raise ValueError("T and gates_per_step must be nonnegative")
    fidelity = (1.0 - p_err) ** (gates_per_step * T)
    return fidelity * p_ideal + (1.0 - fidelity) * target_fraction


def default_gates_per_step(n: int) -> int:
    return max(1, math.ceil(5 * math.log2(n)))


@dataclass
class WalkTrajectory:
    t: np.ndarray
    prob_matching: np.ndarray
    prob_matching_noisy: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["t", "prob_matching", "prob_matching_noisy"])
        for t, p, q in zip(self.t, self.prob_matching, self.prob_matching_noisy):
            wr.writerow([int(t), f"{p:.12g}", f"{q:.12g}"])
        return buf.getvalue()


def walk_probe(
    g: Graph,
    h: Graph,
    pi: Permutation,
    T: int,
    convention: str = "stationary",
    rng: Optional[np.random.Generator] = None,
    trials: int = 20,
    p_err: float = 0.0,
    gates_per_step: Optional[int] = None,
) -> WalkTrajectory:
    """Probability of measuring a vertex of ``M_pi`` after ``t = 0..T`` steps.

    ``stationary`` starts in the stationary edge state.  ``vertex_start_cesaro``
    starts in ``|x0>|psi_x0>`` for uniformly drawn ``x0`` and reports the
    running time-average, averaged over ``trials`` starts.
    """
    n = g.n
    if n > DENSE_MAX_N:
        raise ValueError(f"walk probe limited to n <= {DENSE_MAX_N}, got n={n}")
    op = WalkOperator(g, h)
    m_idx = matching_indices(pi)
    ts = np.arange(T + 1)

    def run(state: EdgeState) -> np.ndarray:
        out = np.empty(T + 1)
        amps = state.amps
        for t in range(T + 1):
            if t:
                amps = op.step(amps)
            out[t] = measure_first_register(EdgeState(n, amps))[m_idx].sum()
        return out

    if convention == "stationary":
        traj = run(stationary_edge_state(g, h, op))
    elif convention == "vertex_start_cesaro":
        if rng is None:
            raise ValueError("vertex_start_cesaro needs an rng")
        acc = np.zeros(T + 1)
        for _ in range(trials):
            x0 = int(rng.integers(op.N))
            raw = run(vertex_edge_state(divmod(x0, n), g, h, op))
            acc += np.cumsum(raw) / (ts + 1)
        traj = acc / trials
    else:
        raise ValueError(f"unknown convention {convention!r}")
    gps = default_gates_per_step(n) if gates_per_step is None else gates_per_step
    noisy = np.array([depolarized_prob(min(1.0, max(0.0, p)), int(t), p_err, gps, 1.0 / n) for t, p in zip(ts, traj)])
    return WalkTrajectory(ts, traj, noisy)
