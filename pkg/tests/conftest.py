"""Shared graphs and link models."""

import numpy as np
import pytest

from supergraph import Supergraph, generate_connected_geometric, independent_model, spatial_model


@pytest.fixture
def two_node_graph():
    return Supergraph(2, ((0, 1),))


@pytest.fixture
def path3():
    """Path 1-2-3."""
    return Supergraph(3, ((0, 1), (1, 2)))


@pytest.fixture
def star5():
    """Star with the center at node 0 (degree 4)."""
    return Supergraph(5, ((0, 1), (0, 2), (0, 3), (0, 4)))


@pytest.fixture
def two_node_random():
    """Two nodes, one link alive with probability 0.8."""
    return independent_model(Supergraph(2, ((0, 1),)), [0.8])


@pytest.fixture(scope="module")
def small_generated():
    """Connected geometric graph with N=10, M=18."""
    return generate_connected_geometric(10, 18, np.random.default_rng(7))


@pytest.fixture(scope="module")
def small_model(small_generated):
    """Distance-based probabilities with shared-node correlations on the small graph."""
    return spatial_model(small_generated.graph, small_generated.radius, c1=0.6, c2=0.2)


def random_connected_graph(n_nodes: int, rng: np.random.Generator):
    """Connected geometric graph with roughly twice as many edges as nodes."""
    max_pairs = n_nodes * (n_nodes - 1) // 2
    target = min(max_pairs, max(n_nodes - 1, 2 * n_nodes))
    return generate_connected_geometric(n_nodes, target, rng)
