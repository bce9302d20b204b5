"""
Correlated Link Sampler

Draws link indicators sequentially in canonical edge order. Edge e is drawn as a
Bernoulli variable whose conditional mean is linear in the earlier outcomes:

    mu_e = P_e + alpha_e b_e^T (y_{<e} - P_{<e})

With b_e = Gamma_{<e,<e}^{-1} Gamma_{<e,e} and alpha_e = 1 the joint law reproduces the
target means and cross-covariances exactly, as long as no conditional mean leaves [0, 1].
All b_e come from one Cholesky factor: with Gamma = C C^T, b_e = -C_ee (C^{-1})_{e,<e}.

On dense models some histories push mu_e out of range, and clipping them biases the
marginals. A fixed-seed pilot run shrinks each b_e by the largest alpha_e <= 1 that
leaves at most CALIBRATION_CLAMP_TARGET of the pilot histories out of range. Every
alpha_e keeps E[y_e] = P_e; only covariances with earlier links are attenuated.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from supergraph import LinkStatModel, validate_model

logger = logging.getLogger(__name__)

RIDGE = 1e-10
DEFAULT_CLAMP_EPS = 1e-9
CALIBRATION_SAMPLES = 20_000
CALIBRATION_CLAMP_TARGET = 2e-3
CALIBRATION_SEED = 0


class ModelNotPSDError(ValueError):
    """Raised when the link covariance cannot belong to any joint binary law."""


@dataclass(eq=False)
class TopologySampler:
    """Precomputed conditional linear family for one link model."""
    model: LinkStatModel
    coefficients: np.ndarray = field(repr=False)  # strictly lower triangular; row e is b_e
    clamp_eps: float = DEFAULT_CLAMP_EPS
    ridge_used: bool = False
    attenuation: Optional[np.ndarray] = field(default=None, repr=False)  # alpha_e; all ones means exact
    effective: np.ndarray = field(init=False, repr=False)  # alpha_e b_e, the rows actually used
    clamp_count: int = 0  # running totals over sample_topology calls
    draw_count: int = 0

    def __post_init__(self):
        if self.attenuation is None:
            self.attenuation = np.ones(self.model.n_edges)
        self.effective = self.coefficients * self.attenuation[:, None]

    @property
    def n_edges(self) -> int:
        return self.model.n_edges

    @property
    def attenuated(self) -> bool:
        """True when some regression was shrunk, so cross-covariances are only approximate."""
        return bool(np.any(self.attenuation < 1.0))

    @property
    def clamp_rate(self) -> float:
        """Fraction of conditional means clamped so far."""
        return self.clamp_count / self.draw_count if self.draw_count else 0.0

    def record(self, n_topologies: int, n_clamped: int) -> None:
        """Fold the counters of a batch drawn elsewhere into the running totals."""
        self.draw_count += n_topologies * self.n_edges
        self.clamp_count += n_clamped


def _regression_coefficients(gamma: np.ndarray) -> Tuple[np.ndarray, bool]:
    """All b_e at once from the Cholesky factor of Gamma (ridged when singular)."""
    m = gamma.shape[0]
    if m == 0:
        return np.zeros((0, 0)), False
    ridge_used = False
    try:
        chol = np.linalg.cholesky(gamma)
    except np.linalg.LinAlgError:
        chol = np.linalg.cholesky(gamma + RIDGE * np.eye(m))
        ridge_used = True
    inverse = solve_triangular(chol, np.eye(m), lower=True)
    coefficients = -np.diag(chol)[:, None] * inverse
    return np.tril(coefficients, k=-1), ridge_used


def _calibrate_attenuation(probs: np.ndarray, coefficients: np.ndarray, clamp_eps: float,
                           n_samples: int, target: float) -> np.ndarray:
    """
    Per-link shrink factors alpha_e from one sequential pilot run.

    For every pilot history the largest factor keeping mu_e inside [eps, 1 - eps] is
    computed; alpha_e is the order statistic that leaves at most ``target`` of the
    histories above it, capped at 1.
    """
    m = probs.size
    alpha = np.ones(m)
    if m == 0 or n_samples < 1:
        return alpha
    rng = np.random.default_rng(CALIBRATION_SEED)
    uniforms = rng.random((n_samples, m))
    low, high = clamp_eps, 1.0 - clamp_eps
    rank = min(int(target * n_samples), n_samples - 1)
    centered = np.zeros((n_samples, m))
    for e in range(m):
        mean = probs[e]
        if 0.0 < probs[e] < 1.0 and e > 0:
            shift = centered[:, :e] @ coefficients[e, :e]
            limit = np.full(n_samples, np.inf)
            up, down = shift > 0.0, shift < 0.0
            limit[up] = (high - probs[e]) / shift[up]
            limit[down] = (low - probs[e]) / shift[down]
            alpha[e] = min(1.0, float(np.partition(limit, rank)[rank]))
            mean = np.clip(probs[e] + alpha[e] * shift, low, high)
        centered[:, e] = (uniforms[:, e] < mean) - probs[e]
    return alpha


def build_sampler(model: LinkStatModel, clamp_eps: float = DEFAULT_CLAMP_EPS, check: bool = True,
                  calibration_samples: int = CALIBRATION_SAMPLES) -> TopologySampler:
    """
    Precompute the regression vectors of the conditional linear family.

    Args:
        model: Link statistics.
        clamp_eps: Conditional means of non-degenerate links are clamped to
            [clamp_eps, 1 - clamp_eps].
        check: Run the PSD check first.
        calibration_samples: Pilot histories used to shrink regressions that would
            clamp; 0 keeps the exact regressions.

    Returns:
        The sampler.
    """
    if check:
        report = validate_model(model, probe_samples=0)
        if not report.psd:
            raise ModelNotPSDError(
                f"Link covariance is not positive semidefinite (min eigenvalue "
                f"{report.min_eigenvalue:.3e}); reduce the correlation constant c2")

    if model.is_independent:
        return TopologySampler(model, np.zeros((model.n_edges, model.n_edges)), clamp_eps)

    coefficients, ridge_used = _regression_coefficients(model.cross_cov)
    attenuation = _calibrate_attenuation(model.probs, coefficients, clamp_eps,
                                         calibration_samples, CALIBRATION_CLAMP_TARGET)
    shrunk = int(np.count_nonzero(attenuation < 1.0))
    logger.debug(f"Built sampler over M={model.n_edges} links (ridge={'yes' if ridge_used else 'no'}, "
                 f"{shrunk} regression(s) shrunk, smallest factor {attenuation.min():.3f})")
    return TopologySampler(model, coefficients, clamp_eps, ridge_used, attenuation)


def draw_topologies(sampler: TopologySampler, rng: np.random.Generator,
                    size: int) -> Tuple[np.ndarray, int]:
    """
    Draw ``size`` independent topologies without touching the sampler's counters.

    Args:
        sampler: Built sampler.
        rng: Random stream; consumes exactly size x M uniforms.
        size: Number of topologies.

    Returns:
        (size x M boolean activity matrix, number of clamped conditional means)
    """
    probs = sampler.model.probs
    m = sampler.n_edges
    uniforms = rng.random((size, m))
    if sampler.model.is_independent:
        return uniforms < probs, 0

    interior = (probs > 0.0) & (probs < 1.0)
    low, high = sampler.clamp_eps, 1.0 - sampler.clamp_eps
    active = np.zeros((size, m), dtype=bool)
    centered = np.zeros((size, m))
    clamped = 0
    for e in range(m):
        if interior[e]:
            mean = probs[e] + centered[:, :e] @ sampler.effective[e, :e]
            outside = (mean < low) | (mean > high)
            clamped += int(np.count_nonzero(outside))
            mean = np.clip(mean, low, high)
        else:
            mean = probs[e]
        active[:, e] = uniforms[:, e] < mean
        centered[:, e] = active[:, e] - probs[e]
    return active, clamped


def sample_topology(sampler: TopologySampler, rng: np.random.Generator) -> np.ndarray:
    """Draw one topology (boolean mask over edges) and update the clamp counters."""
    active, clamped = draw_topologies(sampler, rng, 1)
    sampler.record(1, clamped)
    return active[0]


def estimate_link_moments(sampler: TopologySampler, n_samples: int,
                          rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Empirical link frequencies and covariance over ``n_samples`` draws."""
    active, clamped = draw_topologies(sampler, rng, n_samples)
    sampler.record(n_samples, clamped)
    data = active.astype(float)
    return data.mean(axis=0), np.cov(data, rowvar=False, bias=True).reshape(sampler.n_edges, sampler.n_edges)


def exact_joint_distribution(sampler: TopologySampler) -> Tuple[np.ndarray, np.ndarray]:
    """
    Enumerate the joint law implied by the sequential draws.

    Args:
        sampler: Sampler over at most 12 links.

    Returns:
        (2^M x M outcome matrix, outcome probabilities)
    """
    m = sampler.n_edges
    if m > 12:
        raise ValueError(f"Enumeration is limited to 12 links, got {m}")
    probs = sampler.model.probs
    low, high = sampler.clamp_eps, 1.0 - sampler.clamp_eps
    outcomes = np.array(list(itertools.product((0, 1), repeat=m)), dtype=float).reshape(-1, m)
    weights = np.ones(outcomes.shape[0])
    for e in range(m):
        if 0.0 < probs[e] < 1.0:
            mean = probs[e] + (outcomes[:, :e] - probs[:e]) @ sampler.effective[e, :e]
            mean = np.clip(mean, low, high)
        else:
            mean = np.full(outcomes.shape[0], probs[e])
        weights *= np.where(outcomes[:, e] == 1.0, mean, 1.0 - mean)
    return outcomes, weights


def implied_covariance(sampler: TopologySampler) -> np.ndarray:
    """
    Link covariance of the sequential law, ignoring clamping.

    Row e below the diagonal is alpha_e b_e^T Gamma'_{<e,<e}; it equals the target
    covariance whenever no regression was shrunk.
    """
    probs = sampler.model.probs
    m = sampler.n_edges
    cov = np.diag(probs * (1.0 - probs))
    for e in range(1, m):
        if 0.0 < probs[e] < 1.0:
            row = sampler.effective[e, :e] @ cov[:e, :e]
            cov[e, :e] = row
            cov[:e, e] = row
    return cov
