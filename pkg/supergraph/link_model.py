"""
Link Statistics Models

Per-edge activation probabilities and the spatially correlated cross-covariance
matrix of the link indicators. Only edges that share a node are correlated.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np
from scipy import sparse

from .geometric_graph import Supergraph

# Setup logging
logger = logging.getLogger(__name__)

PSD_TOLERANCE = 1e-10


class MissingCoordinatesError(ValueError):
    """Raised when a distance-based model is requested for a graph without node positions."""


@dataclass(eq=False)
class LinkStatModel:
    """
    First and second moments of the random link indicators.

    ``cross_cov`` is the full M x M covariance of the indicators: P_e(1 - P_e) on the
    diagonal and the cross-variances R_ef off the diagonal.
    """
    graph: Supergraph
    probs: np.ndarray  # P_e per canonical edge
    cross_cov: np.ndarray  # Gamma, M x M
    c1: Optional[float] = None
    c2: Optional[float] = None
    radius: Optional[float] = None

    def __post_init__(self):
        m = self.graph.n_edges
        self.probs = np.asarray(self.probs, dtype=float).reshape(-1)
        self.cross_cov = np.asarray(self.cross_cov, dtype=float)
        if self.probs.shape != (m,):
            raise ValueError(f"probs must have length {m}, got {self.probs.shape[0]}")
        if self.cross_cov.shape != (m, m):
            raise ValueError(f"cross_cov must be {m}x{m}, got {self.cross_cov.shape}")
        if np.any(self.probs <= 0.0) or np.any(self.probs > 1.0):
            raise ValueError("Link probabilities must lie in (0, 1]")

    @property
    def n_edges(self) -> int:
        return self.graph.n_edges

    @cached_property
    def is_deterministic(self) -> bool:
        """True for the static network: every link always alive."""
        return bool(np.all(self.probs == 1.0) and not np.any(self.cross_cov))

    @cached_property
    def is_independent(self) -> bool:
        """True when the cross-covariance is diagonal."""
        return not np.any(self.cross_cov - np.diag(np.diag(self.cross_cov)))

    @cached_property
    def coupling(self) -> sparse.csr_matrix:
        """
        Gamma masked by the edge Gram matrix B^T B, i.e. Gamma_ef (a_e^T a_f).

        Nonzero only on the diagonal and for adjacent pairs; this is the correction
        that E[L^2] carries on top of E[L]^2.
        """
        gram = self.graph.incidence.T @ self.graph.incidence
        return sparse.csr_matrix(self.cross_cov * gram)


def deterministic_model(graph: Supergraph) -> LinkStatModel:
    """Static network: P = 1 and zero covariance on every link."""
    m = graph.n_edges
    return LinkStatModel(graph, np.ones(m), np.zeros((m, m)), c1=0.0, c2=0.0)


def independent_model(graph: Supergraph, probs: np.ndarray) -> LinkStatModel:
    """Independent links with the given activation probabilities."""
    probs = np.asarray(probs, dtype=float)
    return LinkStatModel(graph, probs, np.diag(probs * (1.0 - probs)), c2=0.0)


def assign_probabilities(graph: Supergraph, c1: float, radius: float) -> np.ndarray:
    """
    Distance-decaying link probabilities P_ij = 1 - c1 (delta_ij / r)^2.

    Args:
        graph: Geometric supergraph (must carry coordinates).
        c1: Decay constant in [0, 1).
        radius: Radius the graph was generated with.

    Returns:
        Length-M probability vector in canonical edge order.
    """
    if graph.coordinates is None:
        raise MissingCoordinatesError(
            "Graph has no node coordinates; supply link probabilities externally")
    if not (0.0 <= c1 < 1.0):
        raise ValueError(f"c1 must lie in [0, 1), got {c1}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    return 1.0 - c1 * (graph.edge_lengths() / radius) ** 2


def build_correlations(graph: Supergraph, probs: np.ndarray, c2: float) -> LinkStatModel:
    """
    Correlate every pair of edges sharing a node with R = c2 * Pmin * (1 - Pmax).

    Args:
        graph: The supergraph.
        probs: Per-edge activation probabilities.
        c2: Correlation constant in [0, 1).

    Returns:
        The link statistics model.
    """
    if not (0.0 <= c2 < 1.0):
        raise ValueError(f"c2 must lie in [0, 1), got {c2}")
    probs = np.asarray(probs, dtype=float)
    if probs.shape != (graph.n_edges,):
        raise ValueError(f"probs must have length {graph.n_edges}, got {probs.shape}")

    gamma = np.diag(probs * (1.0 - probs))
    pairs = graph.adjacent_edge_pairs
    if c2 > 0.0 and len(pairs):
        e, f = pairs[:, 0], pairs[:, 1]
        p_min = np.minimum(probs[e], probs[f])
        p_max = np.maximum(probs[e], probs[f])
        r = c2 * p_min * (1.0 - p_max)
        gamma[e, f] = r
        gamma[f, e] = r
    return LinkStatModel(graph, probs, gamma, c2=c2)


def spatial_model(graph: Supergraph, radius: float, c1: float = 0.6, c2: float = 0.2) -> LinkStatModel:
    """Distance-based probabilities plus shared-node correlations."""
    model = build_correlations(graph, assign_probabilities(graph, c1, radius), c2)
    model.c1 = c1
    model.radius = radius
    return model


@dataclass
class ModelReport:
    """Result of checking that a joint binary law with the model's moments can be sampled."""
    psd: bool
    min_eigenvalue: float
    cauchy_schwarz_violations: List[Tuple[int, int]] = field(default_factory=list)
    clamp_rate: Optional[float] = None  # fraction of clamped conditional means in the probe

    @property
    def ok(self) -> bool:
        return self.psd and not self.cauchy_schwarz_violations


def validate_model(model: LinkStatModel, probe_samples: int = 10_000,
                   rng: Optional[np.random.Generator] = None) -> ModelReport:
    """
    Check the covariance for positive semidefiniteness and Cauchy-Schwarz, and probe clamping.

    Args:
        model: Model to check.
        probe_samples: Topologies drawn to estimate the clamp rate; 0 skips the probe.
        rng: Stream for the probe (seed 0 when omitted).

    Returns:
        The report; nothing is raised here.
    """
    gamma = model.cross_cov
    min_eig = float(np.linalg.eigvalsh(gamma).min()) if model.n_edges else 0.0
    psd = bool(np.allclose(gamma, gamma.T, rtol=0.0, atol=1e-15) and min_eig >= -PSD_TOLERANCE)

    var = np.diag(gamma)
    bound = np.sqrt(np.outer(var, var))
    rows, cols = np.nonzero(np.triu(np.abs(gamma) > bound + 1e-15, k=1))
    violations = list(zip(rows.tolist(), cols.tolist()))

    clamp_rate = None
    if psd and probe_samples > 0:
        # Deferred: the sampler lives in netsim, which itself depends on this module.
        from netsim.sampler import build_sampler, draw_topologies

        sampler = build_sampler(model, check=False)
        probe_rng = rng if rng is not None else np.random.default_rng(0)
        _, clamped = draw_topologies(sampler, probe_rng, probe_samples)
        clamp_rate = clamped / float(probe_samples * max(model.n_edges, 1))

    report = ModelReport(psd, min_eig, violations, clamp_rate)
    if not report.ok:
        logger.warning(f"Link model check failed: psd={psd} (min eigenvalue {min_eig:.3e}), "
                       f"{len(violations)} Cauchy-Schwarz violation(s)")
    return report
