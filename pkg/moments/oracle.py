"""
Monte Carlo estimate of E[W^2], independent of the closed form in state_matrices.
"""

from dataclasses import dataclass

import numpy as np

from supergraph import LinkStatModel

from .state_matrices import ArrayLike, realized_state_matrix, weight_values


@dataclass
class MomentEstimate:
    """Sample mean of W(omega)^2 with the per-entry standard error of that mean."""
    mean: np.ndarray
    stderr: np.ndarray
    n_samples: int
    clamp_rate: float = 0.0


def monte_carlo_moment_estimate(weights: ArrayLike, model: LinkStatModel, n_samples: int,
                                rng: np.random.Generator, batch_size: int = 1000) -> MomentEstimate:
    """
    Average W(omega)^2 over sampled topologies.

    Args:
        weights: Edge weights.
        model: Link statistics; must pass the sampler's PSD check.
        n_samples: Number of topologies.
        rng: Random stream.
        batch_size: Topologies drawn per sampler call.

    Returns:
        The N x N estimate of E[W^2] and its standard errors.
    """
    # Deferred: netsim builds on this package.
    from netsim.sampler import build_sampler, draw_topologies

    if n_samples < 1:
        raise ValueError(f"n_samples must be at least 1, got {n_samples}")
    w = weight_values(weights, model.n_edges)
    sampler = build_sampler(model)
    graph = model.graph

    total = np.zeros((graph.n_nodes, graph.n_nodes))
    total_sq = np.zeros_like(total)
    clamped = 0
    remaining = n_samples
    while remaining > 0:
        size = min(batch_size, remaining)
        active, batch_clamped = draw_topologies(sampler, rng, size)
        clamped += batch_clamped
        for mask in active:
            state = realized_state_matrix(w, mask, graph)
            square = state @ state
            total += square
            total_sq += square * square
        remaining -= size

    mean = total / n_samples
    if n_samples > 1:
        variance = np.maximum(total_sq / n_samples - mean * mean, 0.0) * n_samples / (n_samples - 1)
        stderr = np.sqrt(variance / n_samples)
    else:
        stderr = np.zeros_like(mean)
    clamp_rate = clamped / (n_samples * model.n_edges) if model.n_edges else 0.0
    return MomentEstimate(mean, stderr, n_samples, clamp_rate)


def monte_carlo_moment_oracle(weights: ArrayLike, model: LinkStatModel, n_samples: int,
                              rng: np.random.Generator, batch_size: int = 1000) -> np.ndarray:
    """N x N sample mean of W(omega)^2; see monte_carlo_moment_estimate."""
    return monte_carlo_moment_estimate(weights, model, n_samples, rng, batch_size).mean
