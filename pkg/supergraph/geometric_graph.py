"""
Supergraph Construction

This module holds the supergraph type (every link that can ever be alive) and the
random geometric generators used to build the experimental networks: nodes dropped
uniformly on the unit square, linked when closer than a communication radius.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.spatial.distance import pdist

# Setup logging
logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class Supergraph:
    """
    Undirected graph collecting all links with nonzero probability of being alive.

    Nodes are 0-based internally; edges are kept as (i, j) pairs with i < j in
    lexicographic order, so an edge's position in ``edges`` is its canonical index.
    """
    n_nodes: int  # N
    edges: Tuple[Edge, ...]  # canonical edge order, length M
    coordinates: Optional[np.ndarray] = field(default=None, repr=False)  # (N, 2) positions, geometric graphs only

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError(f"n_nodes must be positive, got {self.n_nodes}")
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        for i, j in edges:
            if i == j:
                raise ValueError(f"Self-loop at node {i} is not allowed")
            if not (0 <= i < j < self.n_nodes):
                raise ValueError(f"Edge ({i}, {j}) must satisfy 0 <= i < j < {self.n_nodes}")
        if list(edges) != sorted(set(edges)):
            raise ValueError("Edges must be unique and sorted lexicographically")
        object.__setattr__(self, "edges", edges)
        if self.coordinates is not None:
            coords = np.asarray(self.coordinates, dtype=float)
            if coords.shape != (self.n_nodes, 2):
                raise ValueError(f"coordinates must have shape ({self.n_nodes}, 2), got {coords.shape}")
            object.__setattr__(self, "coordinates", coords)

    @classmethod
    def from_edges(cls, n_nodes: int, edges: Sequence[Edge],
                   coordinates: Optional[np.ndarray] = None) -> "Supergraph":
        """Build a supergraph from an unordered edge collection, normalizing to canonical order."""
        canonical = sorted({(min(i, j), max(i, j)) for i, j in edges})
        return cls(n_nodes, tuple(canonical), coordinates)

    @property
    def n_edges(self) -> int:
        """Number of edges M."""
        return len(self.edges)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Edges as an (M, 2) integer array."""
        return np.array(self.edges, dtype=int).reshape(-1, 2)

    @cached_property
    def incidence(self) -> np.ndarray:
        """N x M matrix whose column e is u_i - u_j for edge e = {i, j}."""
        b = np.zeros((self.n_nodes, self.n_edges))
        cols = np.arange(self.n_edges)
        b[self.edge_array[:, 0], cols] = 1.0
        b[self.edge_array[:, 1], cols] = -1.0
        return b

    @cached_property
    def degrees(self) -> np.ndarray:
        """Supergraph degree of every node."""
        return np.bincount(self.edge_array.ravel(), minlength=self.n_nodes)

    @cached_property
    def neighborhoods(self) -> List[List[int]]:
        """For every node, the canonical indices of its incident edges (the set O_i)."""
        incident: List[List[int]] = [[] for _ in range(self.n_nodes)]
        for e, (i, j) in enumerate(self.edges):
            incident[i].append(e)
            incident[j].append(e)
        return incident

    @cached_property
    def adjacent_edge_pairs(self) -> np.ndarray:
        """(K, 2) array of edge index pairs e < f that share a node."""
        pairs = set()
        for incident in self.neighborhoods:
            for a in range(len(incident)):
                for b in range(a + 1, len(incident)):
                    pairs.add((incident[a], incident[b]))
        return np.array(sorted(pairs), dtype=int).reshape(-1, 2)

    def edge_index(self) -> Dict[Edge, int]:
        """Map from (i, j) pair to canonical edge index."""
        return {edge: e for e, edge in enumerate(self.edges)}

    def edge_lengths(self) -> np.ndarray:
        """Euclidean length of every edge; requires coordinates."""
        if self.coordinates is None:
            raise ValueError("Graph has no coordinates")
        diff = self.coordinates[self.edge_array[:, 0]] - self.coordinates[self.edge_array[:, 1]]
        return np.linalg.norm(diff, axis=1)

    def to_networkx(self) -> nx.Graph:
        """Convert to a networkx graph on nodes 0..N-1."""
        g = nx.Graph()
        g.add_nodes_from(range(self.n_nodes))
        g.add_edges_from(self.edges)
        return g

    def is_connected(self) -> bool:
        """True when every node is reachable from every other node."""
        if self.n_nodes == 1:
            return True
        return nx.is_connected(self.to_networkx())


@dataclass
class GenerationResult:
    """Outcome of one geometric graph draw."""
    graph: Supergraph
    radius: float
    connected: bool


def geometric_from_coordinates(coordinates: np.ndarray, radius: float) -> GenerationResult:
    """
    Link every pair of nodes strictly closer than ``radius``.

    Args:
        coordinates: (N, 2) node positions.
        radius: Communication radius.

    Returns:
        The generated graph with its connectivity flag.
    """
    coords = np.asarray(coordinates, dtype=float)
    n_nodes = coords.shape[0]
    if n_nodes < 2:
        raise ValueError(f"Need at least 2 nodes, got {n_nodes}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")

    rows, cols = np.triu_indices(n_nodes, k=1)
    dists = pdist(coords)
    keep = dists < radius
    # triu_indices enumerates pairs lexicographically, so the order is already canonical
    edges = tuple(zip(rows[keep].tolist(), cols[keep].tolist()))
    graph = Supergraph(n_nodes, edges, coords)
    return GenerationResult(graph, float(radius), graph.is_connected())


def generate_geometric(n_nodes: int, radius: float, rng: np.random.Generator) -> GenerationResult:
    """
    Drop ``n_nodes`` nodes i.i.d. uniformly on the unit square and link close pairs.

    Connectivity is reported, not enforced; callers resample when they need it.
    """
    if n_nodes < 2:
        raise ValueError(f"n_nodes must be at least 2, got {n_nodes}")
    coords = rng.uniform(0.0, 1.0, size=(n_nodes, 2))
    result = geometric_from_coordinates(coords, radius)
    logger.debug(f"Geometric graph: N={n_nodes}, radius={radius:.6f}, "
                 f"M={result.graph.n_edges}, connected={result.connected}")
    return result


def _radius_for_edge_count(dists: np.ndarray, target_edges: int) -> float:
    """Radius between the target-th and next pairwise distance, giving exactly target_edges links."""
    ordered = np.sort(dists)
    if target_edges == ordered.size:
        return float(ordered[-1] * (1.0 + 1e-9) + 1e-12)
    return float(0.5 * (ordered[target_edges - 1] + ordered[target_edges]))


def generate_connected_geometric(n_nodes: int, target_edges: int, rng: np.random.Generator,
                                 max_attempts: int = 1000) -> GenerationResult:
    """
    Draw a connected geometric graph with exactly ``target_edges`` edges.

    The radius is not known up front, so each placement gets the radius at which its
    edge count equals the target; placements are redrawn until the graph is connected.

    Args:
        n_nodes: Number of nodes N.
        target_edges: Required number of edges M.
        rng: Random stream for node placement.
        max_attempts: Placements to try before giving up.

    Returns:
        The first connected draw.
    """
    max_pairs = n_nodes * (n_nodes - 1) // 2
    if n_nodes < 2:
        raise ValueError(f"n_nodes must be at least 2, got {n_nodes}")
    if not (n_nodes - 1 <= target_edges <= max_pairs):
        raise ValueError(f"target_edges must lie in [{n_nodes - 1}, {max_pairs}] "
                         f"for a connected graph on {n_nodes} nodes, got {target_edges}")

    for attempt in range(1, max_attempts + 1):
        coords = rng.uniform(0.0, 1.0, size=(n_nodes, 2))
        radius = _radius_for_edge_count(pdist(coords), target_edges)
        result = geometric_from_coordinates(coords, radius)
        logger.debug(f"Placement {attempt}: radius={radius:.6f}, connected={result.connected}")
        if result.connected and result.graph.n_edges == target_edges:
            logger.info(f"Generated connected geometric graph N={n_nodes}, M={target_edges}, "
                        f"radius={radius:.6f} after {attempt} placement(s)")
            return result

    raise RuntimeError(f"No connected geometric graph with N={n_nodes}, M={target_edges} "
                       f"found in {max_attempts} placements")
