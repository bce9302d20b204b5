"""
Baseline Weight Rules

Metropolis weights, supergraph-based weights (the static psi_1 optimum on the full
supergraph), and the starting-point rules used before optimizing.
"""

import logging
from typing import Dict, Optional

import numpy as np

from moments import WeightVector
from spectrum import evaluate
from spectrum.objectives import ModelOrGraph
from supergraph import Supergraph

from .subgradient import NoFeasiblePointError, Objective, SubgradientSchedule, optimize

logger = logging.getLogger(__name__)

MAX_HALVINGS = 20


class DisconnectedGraphError(ValueError):
    """Raised when a rule needs a connected supergraph."""


def metropolis_weights(graph: Supergraph) -> WeightVector:
    """W_ij = 1 / (1 + max(d_i, d_j)) with d the supergraph degree."""
    degrees = graph.degrees
    edges = graph.edge_array
    return WeightVector(1.0 / (1.0 + np.maximum(degrees[edges[:, 0]], degrees[edges[:, 1]])))


def sgbw_weights(graph: Supergraph, schedule: Optional[SubgradientSchedule] = None,
                 method: str = "lapack") -> WeightVector:
    """
    Supergraph-based weights: minimize psi_1 with every supergraph link treated as alive.

    Args:
        graph: Connected supergraph.
        schedule: Subgradient schedule (defaults apply when None).
        method: Eigensolver.

    Returns:
        The weights, started from the Metropolis rule.
    """
    if not graph.is_connected():
        raise DisconnectedGraphError("Supergraph-based weights require a connected supergraph")
    result = optimize(Objective("psi", 1), graph, metropolis_weights(graph), schedule, method)
    return result.best_weights


def feasible_start(model_or_graph: ModelOrGraph, margin: float = 1e-3,
                   method: str = "lapack") -> WeightVector:
    """
    Metropolis weights, halved until phi_1 < 1 - margin.

    Args:
        model_or_graph: Link model, or a supergraph for the static network.
        margin: Feasibility margin.
        method: Eigensolver.

    Returns:
        A feasible starting point.
    """
    graph = model_or_graph if isinstance(model_or_graph, Supergraph) else model_or_graph.graph
    weights = metropolis_weights(graph)
    for halving in range(MAX_HALVINGS + 1):
        if evaluate(weights, model_or_graph, method).value(1) < 1.0 - margin:
            if halving:
                logger.info(f"Metropolis weights feasible after {halving} halving(s)")
            return weights
        weights = weights.scaled(0.5)
    raise NoFeasiblePointError(f"Metropolis weights still infeasible after {MAX_HALVINGS} halvings")


def best_start(candidates: Dict[str, WeightVector], model_or_graph: ModelOrGraph, n: int,
               margin: float = 1e-3, method: str = "lapack") -> WeightVector:
    """
    The feasible candidate with the lowest phi_n.

    Starting the optimizer there guarantees its result is no worse than any candidate.
    """
    best_name, best_value = None, np.inf
    for name, weights in candidates.items():
        state = evaluate(weights, model_or_graph, method)
        if state.value(1) < 1.0 - margin and state.value(n) < best_value:
            best_name, best_value = name, state.value(n)
    if best_name is None:
        raise NoFeasiblePointError(f"None of the starting candidates {sorted(candidates)} is feasible")
    logger.debug(f"Starting from '{best_name}' weights (objective {best_value:.6g})")
    return candidates[best_name]
