"""
Graph and Correlation Files

Line-oriented text formats for supergraphs and link models. Node and edge indices in
files are 1-based; in memory they are 0-based.

Graph file::

    N M
    i j P        (M lines, i < j)

Correlation file::

    e f R        (nonzero off-diagonal entries, e < f)
"""

import logging
import os
from typing import Optional, Tuple

import numpy as np

from .geometric_graph import Supergraph
from .link_model import LinkStatModel

# Setup logging
logger = logging.getLogger(__name__)


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def save_graph(graph: Supergraph, probs: np.ndarray, path: str) -> None:
    """
    Write the supergraph and its link probabilities.

    Args:
        graph: Graph to write.
        probs: Per-edge probabilities (use ones for a static network).
        path: Output file path.
    """
    probs = np.asarray(probs, dtype=float)
    lines = [f"{graph.n_nodes} {graph.n_edges}"]
    for (i, j), p in zip(graph.edges, probs):
        lines.append(f"{i + 1} {j + 1} {_fmt(p)}")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")
    logger.info(f"Wrote graph with N={graph.n_nodes}, M={graph.n_edges} to {path}")


def load_graph(path: str) -> Tuple[Supergraph, np.ndarray]:
    """
    Read a graph file.

    Args:
        path: Path to the graph file.

    Returns:
        The supergraph (without coordinates) and its probability vector.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Graph file not found: {path}")

    with open(path) as handle:
        rows = [line.split() for line in handle if line.strip()]
    if not rows or len(rows[0]) != 2:
        raise ValueError(f"{path}: first line must be 'N M'")

    n_nodes, n_edges = int(rows[0][0]), int(rows[0][1])
    body = rows[1:]
    if len(body) != n_edges:
        raise ValueError(f"{path}: header announces {n_edges} edges, found {len(body)}")

    edges = []
    probs = np.empty(n_edges)
    for e, fields in enumerate(body):
        if len(fields) != 3:
            raise ValueError(f"{path}: edge line {e + 2} must be 'i j P', got {' '.join(fields)}")
        edges.append((int(fields[0]) - 1, int(fields[1]) - 1))
        probs[e] = float(fields[2])

    # Supergraph validates canonical order, so a shuffled file is rejected rather than reindexed
    graph = Supergraph(n_nodes, tuple(edges))
    return graph, probs


def save_correlations(model: LinkStatModel, path: str) -> None:
    """Write the nonzero off-diagonal cross-variances of ``model``."""
    rows, cols = np.nonzero(np.triu(model.cross_cov, k=1))
    with open(path, "w") as handle:
        for e, f in zip(rows, cols):
            handle.write(f"{e + 1} {f + 1} {_fmt(model.cross_cov[e, f])}\n")
    logger.info(f"Wrote {len(rows)} cross-variances to {path}")


def load_correlations(path: str, graph: Supergraph, probs: np.ndarray) -> LinkStatModel:
    """
    Read a correlation file and assemble the link model.

    Args:
        path: Correlation file.
        graph: Graph the file refers to.
        probs: Probabilities from the graph file.

    Returns:
        The model; the diagonal of the covariance is rebuilt as P(1 - P).
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Correlation file not found: {path}")

    probs = np.asarray(probs, dtype=float)
    gamma = np.diag(probs * (1.0 - probs))
    m = graph.n_edges
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'e f R'")
            e, f, r = int(fields[0]) - 1, int(fields[1]) - 1, float(fields[2])
            if not (0 <= e < f < m):
                raise ValueError(f"{path}:{lineno}: edge indices must satisfy 1 <= e < f <= {m}")
            gamma[e, f] = r
            gamma[f, e] = r
    return LinkStatModel(graph, probs, gamma)


def load_model(graph_path: str, correlation_path: Optional[str] = None) -> LinkStatModel:
    """Load a graph file and, when given, its correlation file; otherwise links are independent."""
    graph, probs = load_graph(graph_path)
    if correlation_path is None:
        return LinkStatModel(graph, probs, np.diag(probs * (1.0 - probs)))
    return load_correlations(correlation_path, graph, probs)
