"""
Ky Fan Objectives

phi_n sums the n largest eigenvalues of M = E[W^2] - J; psi_n is the same quantity on
the static network, where M = (W - J)^2. Both are convex in the weights, and
sum_{i<=n} q_i q_i^T over the leading eigenvectors of M yields a subgradient.
"""

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from moments import ArrayLike, moment_derivatives_trace, moment_matrix, weight_values
from supergraph import LinkStatModel, Supergraph, deterministic_model

from .eigen import SpectralDecomposition, sym_eig

ModelOrGraph = Union[LinkStatModel, Supergraph]


def _check_index(n: int, n_nodes: int) -> None:
    if not (1 <= n <= n_nodes - 1):
        raise ValueError(f"Eigenvalue count n must lie in [1, {n_nodes - 1}], got {n}")


def as_model(model_or_graph: ModelOrGraph) -> LinkStatModel:
    """A supergraph stands for its static network."""
    if isinstance(model_or_graph, Supergraph):
        return deterministic_model(model_or_graph)
    return model_or_graph


@dataclass
class KyFanState:
    """
    One eigendecomposition of M at a weight point, reused for every n.

    The optimizer needs phi_1 (feasibility) and phi_n (objective) together, plus a
    subgradient of one of them; this avoids decomposing M twice per iteration.
    """
    weights: np.ndarray
    model: LinkStatModel = field(repr=False)
    decomposition: SpectralDecomposition = field(repr=False)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.decomposition.eigenvalues

    def value(self, n: int) -> float:
        """phi_n at this point."""
        _check_index(n, self.model.graph.n_nodes)
        return float(np.sum(self.eigenvalues[:n]))

    def gap(self, n: int) -> float:
        """lambda_n - lambda_{n+1}; the subgradient is the gradient when positive."""
        return float(self.eigenvalues[n - 1] - self.eigenvalues[n])

    def subgradient(self, n: int) -> np.ndarray:
        """g_e = trace(G dM/dW_e) with G the projector onto the n leading eigenvectors."""
        _check_index(n, self.model.graph.n_nodes)
        return moment_derivatives_trace(self.weights, self.model, self.decomposition.projector(n))


def evaluate(weights: ArrayLike, model_or_graph: ModelOrGraph, method: str = "lapack") -> KyFanState:
    """Decompose M at ``weights``."""
    model = as_model(model_or_graph)
    w = weight_values(weights, model.n_edges)
    return KyFanState(w, model, sym_eig(moment_matrix(w, model), method))


def phi_n(weights: ArrayLike, model: LinkStatModel, n: int, method: str = "lapack") -> float:
    """
    Sum of the n largest eigenvalues of E[W^2] - J.

    Args:
        weights: Edge weights.
        model: Link statistics.
        n: Number of eigenvalues, 1 <= n <= N-1.
        method: Eigensolver.

    Returns:
        phi_n (nonnegative up to rounding).
    """
    _check_index(n, model.graph.n_nodes)
    return evaluate(weights, model, method).value(n)


def psi_n(weights: ArrayLike, graph: Supergraph, n: int, method: str = "lapack") -> float:
    """Sum of the n largest squared eigenvalues of W - J for the static network."""
    return phi_n(weights, deterministic_model(graph), n, method)


def subgrad_phi_n(weights: ArrayLike, model: LinkStatModel, n: int, method: str = "lapack") -> np.ndarray:
    """
    A subgradient of phi_n; the gradient wherever lambda_n(M) > lambda_{n+1}(M).

    Args:
        weights: Edge weights.
        model: Link statistics.
        n: Number of eigenvalues.
        method: Eigensolver.

    Returns:
        Length-M vector.
    """
    _check_index(n, model.graph.n_nodes)
    return evaluate(weights, model, method).subgradient(n)


def is_feasible(weights: ArrayLike, model_or_graph: ModelOrGraph, margin: float = 0.0,
                method: str = "lapack") -> bool:
    """phi_1 < 1 - margin: the weights converge in mean square."""
    return evaluate(weights, model_or_graph, method).value(1) < 1.0 - margin
