"""Shared pytest fixtures for the qubo_annealer tests.

Fixtures:
  - `rng`: a seeded numpy Generator, fresh per test.
  - `random_model`: factory for random float QUBO models with a given size and
    coupling density.
  - `partition_235`: the number-partition model of S = {2, 3, 5}.
  - `two_node_graph`, `triangle_graph`, `path_graph`: tiny hand-checkable graphs.
  - `karate`, `ieee33`: the bundled datasets, loaded once per session.
"""

import io

import numpy as np
import pytest

from qubo_annealer.graph_io import build_graph, ieee33_bus, karate_club, load_edge_list
from qubo_annealer.problems.number_partition import NumberSet, build_number_partition
from qubo_annealer.qubo_core import build_model_from_arrays


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_model(rng):
    """Factory: `random_model(n, density=0.5, integral=False)`."""

    def _make(n: int, density: float = 0.5, integral: bool = False):
        iu, ju = np.triu_indices(n, k=1)
        keep = rng.random(iu.size) < density
        if integral:
            values = rng.integers(-5, 6, size=int(keep.sum())).astype(float)
            lin = rng.integers(-5, 6, size=n).astype(float)
        else:
            values = rng.normal(size=int(keep.sum()))
            lin = rng.normal(size=n)
        offset = float(rng.integers(-5, 6)) if integral else float(rng.normal())
        return build_model_from_arrays(n, iu[keep], ju[keep], values, lin, offset=offset)

    return _make


@pytest.fixture
def partition_235():
    return build_number_partition(NumberSet.of([2, 3, 5]))


@pytest.fixture
def two_node_graph():
    return build_graph(2, [(0, 1, 1.0)])


@pytest.fixture
def triangle_graph():
    """Weights 1 on (0,1), 2 on (1,2), 3 on (0,2): degrees 4, 3, 5."""
    return build_graph(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)])


@pytest.fixture
def path_graph():
    """Path 0-1-2-3-4 with unit weights."""
    return load_edge_list(io.StringIO("0 1\n1 2\n2 3\n3 4\n"))


@pytest.fixture(scope="session")
def karate():
    return karate_club()


@pytest.fixture(scope="session")
def ieee33():
    return ieee33_bus()
