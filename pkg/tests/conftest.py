import numpy as np
import pytest

from chern_simons_graph import FiniteGraph


def random_connected_graph(rng, n, mu_range=(0.5, 2.0), w_range=(0.1, 3.0), extra=None):
    """Random spanning tree plus extra edges, with random measure and weights."""
    ids = [f"v{i:03d}" for i in range(n)]
    edges = {}
    order = rng.permutation(n)
    for k in range(1, n):
        i, j = order[k], order[rng.integers(k)]
        edges[(min(i, j), max(i, j))] = rng.uniform(*w_range)
    extra = n if extra is None else extra
    for _ in range(extra):
        i, j = rng.choice(n, 2, replace=False)
        edges.setdefault((min(i, j), max(i, j)), rng.uniform(*w_range))
    mu = {x: rng.uniform(*mu_range) for x in ids}
    return FiniteGraph(mu, [(ids[i], ids[j], w) for (i, j), w in edges.items()])


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)
