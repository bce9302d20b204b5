"""
Monte Carlo Consensus Runs

Runs the consensus recursion e(k+1) = (W(k) - J) e(k) over freshly sampled topologies
and averages the squared error over random initial conditions.
"""

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from moments import ArrayLike, weight_values

from .sampler import TopologySampler, draw_topologies

logger = logging.getLogger(__name__)

# spawn_key prefix of the per-trial streams, so they never collide with other uses of a seed
SIMULATION_STREAM = 2
CLAMP_WARNING_RATE = 0.01


@dataclass
class ErrorTrajectory:
    """Mean squared consensus error per iteration, k = 0..K."""
    mse: np.ndarray
    stderr: np.ndarray
    n_trials: int
    seed: Optional[int] = None
    clamp_rate: float = 0.0

    @property
    def horizon(self) -> int:
        return self.mse.shape[0] - 1

    @property
    def relative(self) -> np.ndarray:
        """mse[k] / mse[0]."""
        return self.mse / self.mse[0] if self.mse[0] > 0 else np.zeros_like(self.mse)

    @property
    def moment_exact(self) -> bool:
        """False when clamping exceeded 1 % and the link moments are only approximate."""
        return self.clamp_rate <= CLAMP_WARNING_RATE


def _iterate(w: np.ndarray, sampler: TopologySampler, x0: np.ndarray, horizon: int,
             rng: np.random.Generator) -> Tuple[np.ndarray, int]:
    """Squared error sequence for one initial condition, plus the clamp count."""
    graph = sampler.model.graph
    b = graph.incidence
    error = x0 - x0.mean()
    energies = np.empty(horizon + 1)
    energies[0] = error @ error
    if horizon == 0:
        return energies, 0

    active, clamped = draw_topologies(sampler, rng, horizon)
    for k in range(horizon):
        # W(k) e = e - sum_e delta_e w_e a_e (a_e^T e); J e = 0 up to rounding
        error = error - b @ (np.where(active[k], w, 0.0) * (b.T @ error))
        error -= error.mean()
        energies[k + 1] = error @ error
    return energies, clamped


def run_consensus(weights: ArrayLike, sampler: TopologySampler, x0: np.ndarray, horizon: int,
                  rng: np.random.Generator) -> np.ndarray:
    """
    Squared consensus error ||e(k)||^2 for k = 0..K along one random trajectory.

    Args:
        weights: Edge weights.
        sampler: Topology sampler.
        x0: Initial node values.
        horizon: Number of iterations K.
        rng: Stream for the topology draws.

    Returns:
        Length K+1 array.
    """
    if horizon < 0:
        raise ValueError(f"horizon must be nonnegative, got {horizon}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (sampler.model.graph.n_nodes,):
        raise ValueError(f"x0 must have length {sampler.model.graph.n_nodes}, got {x0.shape}")
    w = weight_values(weights, sampler.n_edges)
    energies, clamped = _iterate(w, sampler, x0, horizon, rng)
    sampler.record(horizon, clamped)
    return energies


def trial_stream(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, derived from the master seed and trial index."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(SIMULATION_STREAM, trial)))


def _trial(w: np.ndarray, sampler: TopologySampler, horizon: int, seed: int,
           trial: int) -> Tuple[np.ndarray, int]:
    rng = trial_stream(seed, trial)
    x0 = rng.standard_normal(sampler.model.graph.n_nodes)
    spread = np.linalg.norm(x0 - x0.mean())
    # unit initial error energy makes trials comparable
    x0 = x0 / spread if spread > 0 else x0
    return _iterate(w, sampler, x0, horizon, rng)


def monte_carlo_mse(weights: ArrayLike, sampler: TopologySampler, horizon: int, n_trials: int,
                    seed: int, workers: int = 1) -> ErrorTrajectory:
    """
    Average the squared error over independent initial conditions and topology streams.

    Args:
        weights: Edge weights.
        sampler: Topology sampler.
        horizon: Number of iterations K.
        n_trials: Number of trials.
        seed: Master seed (64-bit unsigned).
        workers: Threads used for trials; results do not depend on it.

    Returns:
        The error trajectory.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be at least 1, got {n_trials}")
    if horizon < 0:
        raise ValueError(f"horizon must be nonnegative, got {horizon}")
    w = weight_values(weights, sampler.n_edges)

    def run(trial: int) -> Tuple[np.ndarray, int]:
        return _trial(w, sampler, horizon, seed, trial)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(n_trials)))
    else:
        results = [run(trial) for trial in range(n_trials)]

    energies = np.vstack([r[0] for r in results])
    clamped = sum(r[1] for r in results)
    sampler.record(n_trials * horizon, clamped)

    mse = energies.mean(axis=0)
    if n_trials > 1:
        stderr = energies.std(axis=0, ddof=1) / np.sqrt(n_trials)
    else:
        stderr = np.zeros_like(mse)
    draws = n_trials * horizon * sampler.n_edges
    clamp_rate = clamped / draws if draws else 0.0
    if clamp_rate > CLAMP_WARNING_RATE:
        logger.warning(f"Clamp rate {clamp_rate:.2%} exceeds 1 %; link moments are not exact")
    return ErrorTrajectory(mse, stderr, n_trials, seed, clamp_rate)


def save_trajectory(trajectory: ErrorTrajectory, path: str) -> None:
    """Write the trajectory as CSV with header k,mse,stderr."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["k", "mse", "stderr"])
        for k, (mse, err) in enumerate(zip(trajectory.mse, trajectory.stderr)):
            writer.writerow([k, f"{mse:.17g}", f"{err:.17g}"])
    logger.info(f"Wrote trajectory ({trajectory.horizon + 1} rows) to {path}")


def load_trajectory(path: str) -> ErrorTrajectory:
    """Read a trajectory CSV; the trial count is not stored and is reported as 0."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"Trajectory file not found: {path}")
    with open(path, newline="") as handle:
        rows = list(csv.DictReader(handle))
    if not rows:
        raise ValueError(f"{path}: no trajectory rows")
    ks = [int(row["k"]) for row in rows]
    if ks != list(range(len(rows))):
        raise ValueError(f"{path}: iterations must run 0..{len(rows) - 1}")
    mse = np.array([float(row["mse"]) for row in rows])
    stderr = np.array([float(row["stderr"]) for row in rows])
    return ErrorTrajectory(mse, stderr, n_trials=0)
