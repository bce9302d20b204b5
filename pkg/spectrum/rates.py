"""
Convergence Rates and Error Modes

For the static network the error obeys ||e(k)||^2 = sum_i lambda_i^{2k} (q_i^T e(0))^2
over the nontrivial eigenpairs of W - J; for the random network lambda_1(E[W^2] - J)
bounds the per-step mean-square contraction.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from moments import ArrayLike, averaging_projector, moment_matrix, realized_state_matrix, weight_values
from supergraph import LinkStatModel, Supergraph

from .eigen import sym_eig

ORTHOGONALITY_TOLERANCE = 1e-10


class NotConsensusErrorVector(ValueError):
    """Raised when an error vector has a component along the all-ones vector."""


@dataclass
class RateReport:
    r_as: float  # |lambda_1(W - J)| on the static supergraph
    r_step: float  # same as r_as for symmetric W
    ms_bound: float  # 0.5 ln lambda_1(E[W^2] - J); -inf when lambda_1 = 0
    feasible: bool  # lambda_1(E[W^2] - J) < 1
    lambda_1: float  # lambda_1(E[W^2] - J)


def static_error_matrix(weights: ArrayLike, graph: Supergraph) -> np.ndarray:
    """W - J with every supergraph link alive."""
    w = weight_values(weights, graph.n_edges)
    full = np.ones(graph.n_edges, dtype=bool)
    return realized_state_matrix(w, full, graph) - averaging_projector(graph.n_nodes)


def rates(weights: ArrayLike, graph: Supergraph, model: LinkStatModel, method: str = "lapack") -> RateReport:
    """
    Static and mean-square convergence rates of ``weights``.

    Args:
        weights: Edge weights.
        graph: Supergraph (static rate).
        model: Link statistics (mean-square rate).
        method: Eigensolver.

    Returns:
        The rate report.
    """
    static = sym_eig(static_error_matrix(weights, graph), method).eigenvalues
    r_as = float(np.max(np.abs(static)))
    lambda_1 = float(sym_eig(moment_matrix(weights, model), method).eigenvalues[0])
    ms_bound = 0.5 * math.log(lambda_1) if lambda_1 > 0.0 else -math.inf
    return RateReport(r_as=r_as, r_step=r_as, ms_bound=ms_bound,
                      feasible=lambda_1 < 1.0, lambda_1=lambda_1)


def mode_decomposition(weights: ArrayLike, graph: Supergraph, e0: np.ndarray, k: int,
                       method: str = "lapack") -> np.ndarray:
    """
    Per-mode error amplitudes zeta_i(k) = lambda_i^k (q_i^T e0) of the static network.

    The decomposition is taken on the complement of the all-ones vector, so the
    trivial eigenpair is excluded even when zero is a repeated eigenvalue.

    Args:
        weights: Edge weights.
        graph: Supergraph.
        e0: Initial consensus error (orthogonal to 1).
        k: Iteration.
        method: Eigensolver.

    Returns:
        Length N-1 amplitudes, ordered by decreasing |lambda_i|.
    """
    e0 = np.asarray(e0, dtype=float)
    n = graph.n_nodes
    if e0.shape != (n,):
        raise ValueError(f"e0 must have length {n}, got {e0.shape}")
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    along_ones = abs(float(np.sum(e0))) / math.sqrt(n)
    if along_ones > ORTHOGONALITY_TOLERANCE:
        raise NotConsensusErrorVector(f"e0 has component {along_ones:.3e} along the all-ones vector")

    basis = null_space(np.ones((1, n)))
    reduced = basis.T @ static_error_matrix(weights, graph) @ basis
    decomposition = sym_eig(reduced, method)
    order = np.argsort(-np.abs(decomposition.eigenvalues), kind="stable")
    lambdas = decomposition.eigenvalues[order]
    modes = basis @ decomposition.eigenvectors[:, order]
    return lambdas ** k * (modes.T @ e0)
