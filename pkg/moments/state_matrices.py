"""
State Matrices and Their Moments

A consensus step is x(k+1) = W(k) x(k) with W(k) = I - sum_e delta_e(k) W_e A_e, where
A_e = a_e a_e^T, a_e = u_i - u_j, and delta_e(k) is the link indicator. Everything here
is assembled from the N x M incidence matrix B (columns a_e), so that

    E[W]        = I - B diag(P * w) B^T
    E[W^2] - J  = E[W]^2 + B diag(w) (Gamma o B^T B) diag(w) B^T - J

The second term is the covariance correction; Gamma o B^T B is nonzero only on the
diagonal and for edge pairs sharing a node.
"""

from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from supergraph import LinkStatModel, Supergraph

ArrayLike = Union["WeightVector", np.ndarray, Iterable[float]]


@dataclass(eq=False)
class WeightVector:
    """One consensus weight per supergraph edge, in canonical edge order."""
    values: np.ndarray

    def __post_init__(self):
        self.values = np.array(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Weights must be finite")

    def __len__(self) -> int:
        return self.values.shape[0]

    def scaled(self, factor: float) -> "WeightVector":
        return WeightVector(self.values * factor)


@dataclass(eq=False)
class MomentMatrix:
    """M = E[W^2] - J together with the weights and model it was built from."""
    m: np.ndarray
    weights: WeightVector = field(repr=False)
    model: LinkStatModel = field(repr=False)


def weight_values(weights: ArrayLike, n_edges: int) -> np.ndarray:
    """Return the raw weight array, checking its length against the edge count."""
    values = weights.values if isinstance(weights, WeightVector) else np.asarray(weights, dtype=float)
    if values.shape != (n_edges,):
        raise ValueError(f"Expected {n_edges} weights, got shape {values.shape}")
    return values


def edge_outer(graph: Supergraph, e: int) -> np.ndarray:
    """
    Elementary Laplacian block A_e of edge e.

    Args:
        graph: The supergraph.
        e: Canonical edge index.

    Returns:
        N x N matrix with +1 at (i,i), (j,j) and -1 at (i,j), (j,i).
    """
    if not (0 <= e < graph.n_edges):
        raise IndexError(f"Edge index {e} out of range for M={graph.n_edges}")
    i, j = graph.edges[e]
    a = np.zeros((graph.n_nodes, graph.n_nodes))
    a[i, i] = a[j, j] = 1.0
    a[i, j] = a[j, i] = -1.0
    return a


def averaging_projector(n_nodes: int) -> np.ndarray:
    """J = 11^T / N."""
    return np.full((n_nodes, n_nodes), 1.0 / n_nodes)


def _laplacian(graph: Supergraph, edge_weights: np.ndarray) -> np.ndarray:
    """sum_e edge_weights[e] * A_e, assembled entrywise so rows sum to zero."""
    n = graph.n_nodes
    lap = np.zeros((n, n))
    i, j = graph.edge_array[:, 0], graph.edge_array[:, 1]
    np.add.at(lap, (i, j), -edge_weights)
    np.add.at(lap, (j, i), -edge_weights)
    np.fill_diagonal(lap, -lap.sum(axis=1))
    return lap


def realized_state_matrix(weights: ArrayLike, active: np.ndarray, graph: Supergraph) -> np.ndarray:
    """
    State matrix of one topology realization.

    Args:
        weights: Edge weights.
        active: Boolean mask over edges (or an array of active edge indices).
        graph: The supergraph.

    Returns:
        W = I - sum over active e of W_e A_e.
    """
    w = weight_values(weights, graph.n_edges)
    active = np.asarray(active)
    if active.dtype != bool:
        mask = np.zeros(graph.n_edges, dtype=bool)
        mask[active.astype(int)] = True
        active = mask
    if active.shape != (graph.n_edges,):
        raise ValueError(f"Active mask must have length {graph.n_edges}")
    return np.eye(graph.n_nodes) - _laplacian(graph, np.where(active, w, 0.0))


def expected_W(weights: ArrayLike, model: LinkStatModel) -> np.ndarray:
    """E[W] = I - sum_e P_e W_e A_e."""
    w = weight_values(weights, model.n_edges)
    return np.eye(model.graph.n_nodes) - _laplacian(model.graph, model.probs * w)


def moment_matrix(weights: ArrayLike, model: LinkStatModel) -> np.ndarray:
    """Raw array form of :func:`error_moment_matrix`."""
    graph = model.graph
    w = weight_values(weights, model.n_edges)
    mean_w = expected_W(w, model)
    bw = graph.incidence * w
    correction = bw @ (model.coupling @ bw.T)
    m = mean_w @ mean_w + correction - averaging_projector(graph.n_nodes)
    return 0.5 * (m + m.T)


def error_moment_matrix(weights: ArrayLike, model: LinkStatModel) -> MomentMatrix:
    """
    Mean-square error dynamics matrix M = E[W^2] - J.

    Args:
        weights: Edge weights.
        model: Link statistics.

    Returns:
        The symmetric positive semidefinite matrix M with M 1 = 0.
    """
    w = weight_values(weights, model.n_edges)
    return MomentMatrix(moment_matrix(w, model), WeightVector(w), model)


def moment_derivative(weights: ArrayLike, model: LinkStatModel, e: int) -> np.ndarray:
    """
    Exact derivative of M with respect to the weight of edge e.

    dM/dW_e = -P_e (A_e E[W] + E[W] A_e) + a_e v_e^T + v_e a_e^T, where
    v_e = B diag(w) (Gamma o B^T B)[:, e].
    """
    graph = model.graph
    w = weight_values(weights, model.n_edges)
    a_outer = edge_outer(graph, e)
    mean_w = expected_W(w, model)
    a_e = graph.incidence[:, e]
    v_e = (graph.incidence * w) @ model.coupling[:, [e]].toarray().ravel()
    d = -model.probs[e] * (a_outer @ mean_w + mean_w @ a_outer) + np.outer(a_e, v_e) + np.outer(v_e, a_e)
    return 0.5 * (d + d.T)


def moment_derivatives_trace(weights: ArrayLike, model: LinkStatModel, g: np.ndarray) -> np.ndarray:
    """
    trace(G dM/dW_e) for every edge e at once.

    Args:
        weights: Edge weights.
        model: Link statistics.
        g: Symmetric N x N matrix G.

    Returns:
        Length-M vector.
    """
    graph = model.graph
    w = weight_values(weights, model.n_edges)
    b = graph.incidence
    mean_w = expected_W(w, model)
    s = mean_w @ g + g @ mean_w
    # a_e^T S a_e = S_ii + S_jj - 2 S_ij
    i, j = graph.edge_array[:, 0], graph.edge_array[:, 1]
    quad = s[i, i] + s[j, j] - 2.0 * s[i, j]
    v = (model.coupling.T @ (b * w).T).T
    cross = np.einsum("ne,ne->e", g @ b, v)
    return -model.probs * quad + 2.0 * cross
