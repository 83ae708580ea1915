import numpy as np
import pytest

from approxgi.graph_core import Graph, make_rng


@pytest.fixture
def rng():
    return make_rng(12345)


def p3() -> Graph:
    """Path 0-1-2."""
    return Graph.from_edges(3, [(0, 1), (1, 2)])


def random_graph_pair(n: int, seed: int):
    r = np.random.default_rng(seed)
    return Graph(n, r.random(n * (n - 1) // 2) < 0.5), Graph(n, r.random(n * (n - 1) // 2) < 0.5)
