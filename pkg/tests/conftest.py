import numpy as np
import pytest

from oimsim import Graph, coupling_from_graph, generate_random_graph


@pytest.fixture
def edge_graph():
    return Graph(2, ((0, 1, 1.0),))


@pytest.fixture
def edge_w(edge_graph):
    return coupling_from_graph(edge_graph)


@pytest.fixture
def triangle_graph():
    return Graph(3, ((0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)))


@pytest.fixture
def triangle_w(triangle_graph):
    return coupling_from_graph(triangle_graph)


@pytest.fixture
def k4_w():
    return coupling_from_graph(generate_random_graph(4, 6, seed=1))


def random_coupling(n, m, seed):
    return coupling_from_graph(generate_random_graph(n, m, seed))


def random_spins(rng, n):
    return rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
