"""
Experiment Orchestration

Builds the network, designs the weights of every scheme, simulates them and writes
the per-scheme files plus the comparison tables. All randomness derives from the
configured master seed, so repeated runs produce identical files.
"""

import csv
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from moments import WeightVector, moment_matrix, save_weights
from netsim import ErrorTrajectory, TopologySampler, build_sampler, monte_carlo_mse, save_trajectory
from optimizer import (
    Objective,
    OptimizationResult,
    best_start,
    feasible_start,
    metropolis_weights,
    optimize,
    save_trace,
    sgbw_weights,
)
from spectrum import rates, spectrum_table
from supergraph import (
    LinkStatModel,
    deterministic_model,
    generate_connected_geometric,
    load_model,
    save_correlations,
    save_graph,
    spatial_model,
    validate_model,
)

from .config import ExperimentConfig, Scheme, save_config
from .report import CompareTable, compare_report, save_compare_report

logger = logging.getLogger(__name__)

# spawn_key prefixes; netsim uses 2 for the simulation trials
GRAPH_STREAM = 0
PROBE_STREAM = 1


@dataclass
class RateRow:
    scheme: str
    lambda_1: float  # phi_1 of the weights on the simulated network
    ms_bound: float
    r_as: float
    empirical_rate: float  # geometric-mean per-step ratio over the second half of the horizon
    clamp_rate: float = 0.0  # fraction of clamped conditional means during the simulation
    moment_exact: bool = True


@dataclass
class ExperimentReport:
    table: CompareTable
    trajectories: Dict[str, ErrorTrajectory] = field(repr=False)
    weights: Dict[str, WeightVector] = field(repr=False)
    rates: List[RateRow] = field(default_factory=list)
    files: List[str] = field(default_factory=list)


def empirical_rate(trajectory: ErrorTrajectory) -> float:
    """Average per-step contraction of the mean curve over the second half of the horizon."""
    horizon = trajectory.horizon
    start = horizon // 2
    steps = horizon - start
    begin, end = trajectory.mse[start], trajectory.mse[horizon]
    if steps == 0 or begin <= 0.0 or end <= 0.0:
        return 0.0
    return float((end / begin) ** (1.0 / steps))


class ConsensusExperiment:
    """
    Runs one configured experiment.

    The random link model is always built (it is what the graph files record); for a
    static network the schemes are designed and simulated on the deterministic model.
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.schedule = config.schedule.to_schedule()
        self.method = config.eigensolver
        self.link_model: Optional[LinkStatModel] = None
        self.model: Optional[LinkStatModel] = None
        self.radius: Optional[float] = None
        self._sampler: Optional[TopologySampler] = None
        self._sgbw: Optional[WeightVector] = None

    def _stream(self, purpose: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.config.seed, spawn_key=(purpose,)))

    def prepare_network(self) -> LinkStatModel:
        """Generate or load the supergraph and its link model."""
        if self.model is not None:
            return self.model

        source = self.config.graph
        if source.from_files:
            self.link_model = load_model(source.graph_file, source.correlation_file)
        else:
            generated = generate_connected_geometric(source.n_nodes, source.target_edges,
                                                     self._stream(GRAPH_STREAM), source.max_attempts)
            self.radius = generated.radius
            self.link_model = spatial_model(generated.graph, generated.radius, source.c1, source.c2)
        self.config.validate(self.link_model.graph.n_nodes)

        if self.config.network == "static":
            self.model = deterministic_model(self.link_model.graph)
        else:
            self.model = self.link_model
            if self.model.is_deterministic:
                logger.info("Link model is deterministic; skipping the sampler check")
                return self.model
            report = validate_model(self.model, rng=self._stream(PROBE_STREAM))
            logger.info(f"Link model: psd={report.psd}, min eigenvalue={report.min_eigenvalue:.3e}, "
                        f"Cauchy-Schwarz violations={len(report.cauchy_schwarz_violations)}, "
                        f"probe clamp rate={report.clamp_rate}")
        return self.model

    @property
    def sampler(self) -> TopologySampler:
        if self._sampler is None:
            self._sampler = build_sampler(self.prepare_network())
        return self._sampler

    def sgbw(self) -> WeightVector:
        if self._sgbw is None:
            self._sgbw = sgbw_weights(self.prepare_network().graph, self.schedule, self.method)
        return self._sgbw

    def design(self, scheme: Scheme) -> Tuple[WeightVector, Optional[OptimizationResult]]:
        """
        Weights of one scheme.

        Optimized schemes start from the better of the feasible Metropolis start and
        the supergraph-based weights, so they never end worse than either baseline.
        """
        model = self.prepare_network()
        graph = model.graph
        if scheme.kind == "metropolis":
            return metropolis_weights(graph), None
        if scheme.kind == "sgbw":
            return self.sgbw(), None

        target = model if scheme.kind == "phi" else deterministic_model(graph)
        margin = self.schedule.margin
        candidates = {
            "metropolis": feasible_start(target, margin, self.method),
            "sgbw": self.sgbw(),
        }
        init = best_start(candidates, target, scheme.n, margin, self.method)
        result = optimize(Objective(scheme.kind, scheme.n), target, init, self.schedule, self.method)
        return result.best_weights, result

    def simulate(self, weights: WeightVector) -> ErrorTrajectory:
        return monte_carlo_mse(weights, self.sampler, self.config.horizon, self.config.trials,
                               self.config.seed, self.config.workers)

    def write_network(self, out_dir: str) -> List[str]:
        """Write graph.txt and correlations.txt for the link model."""
        self.prepare_network()
        os.makedirs(out_dir, exist_ok=True)
        graph_path = os.path.join(out_dir, "graph.txt")
        correlation_path = os.path.join(out_dir, "correlations.txt")
        save_graph(self.link_model.graph, self.link_model.probs, graph_path)
        save_correlations(self.link_model, correlation_path)
        return [graph_path, correlation_path]

    def run(self) -> ExperimentReport:
        """Design, simulate and report every configured scheme."""
        config = self.config
        out_dir = config.output_dir
        model = self.prepare_network()
        files = self.write_network(out_dir)

        trajectories: Dict[str, ErrorTrajectory] = {}
        designed: Dict[str, WeightVector] = {}
        rate_rows: List[RateRow] = []
        for scheme in config.parsed_schemes:
            label = scheme.label
            logger.info(f"Scheme {scheme}: designing weights")
            weights, result = self.design(scheme)
            designed[label] = weights

            weights_path = os.path.join(out_dir, f"{label}.weights.txt")
            save_weights(weights, weights_path)
            files.append(weights_path)
            if result is not None:
                trace_path = os.path.join(out_dir, f"{label}.trace.csv")
                save_trace(result, trace_path)
                files.append(trace_path)

            spectrum_path = os.path.join(out_dir, f"{label}.spectrum.csv")
            write_spectrum(moment_matrix(weights, model), spectrum_path, self.method)
            files.append(spectrum_path)

            logger.info(f"Scheme {scheme}: simulating {config.trials} trial(s) over {config.horizon} iterations")
            trajectory = self.simulate(weights)
            trajectories[label] = trajectory
            trajectory_path = os.path.join(out_dir, f"{label}.trajectory.csv")
            save_trajectory(trajectory, trajectory_path)
            files.append(trajectory_path)

            report = rates(weights, model.graph, model, self.method)
            rate_rows.append(RateRow(label, report.lambda_1, report.ms_bound, report.r_as,
                                     empirical_rate(trajectory), trajectory.clamp_rate,
                                     trajectory.moment_exact))

        table = compare_report(trajectories, config.thresholds)
        summary_path = os.path.join(out_dir, "summary.csv")
        crossings_path = os.path.join(out_dir, "crossings.csv")
        save_compare_report(table, summary_path, crossings_path)
        rates_path = os.path.join(out_dir, "rates.csv")
        write_rates(rate_rows, rates_path)
        config_path = os.path.join(out_dir, "config.resolved.yaml")
        save_config(config, config_path)
        files.extend([summary_path, crossings_path, rates_path, config_path])

        return ExperimentReport(table, trajectories, designed, rate_rows, files)


def write_spectrum(matrix: np.ndarray, path: str, method: str = "lapack") -> None:
    """Eigenvalues of ``matrix`` as CSV with header index,eigenvalue."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["index", "eigenvalue"])
        for index, value in spectrum_table(matrix, method):
            writer.writerow([index, f"{value:.17g}"])


def write_rates(rows: List[RateRow], path: str) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["scheme", "lambda_1", "ms_bound", "r_as", "empirical_rate", "clamp_rate", "moment_exact"])
        for row in rows:
            ms_bound = "-inf" if math.isinf(row.ms_bound) else f"{row.ms_bound:.17g}"
            writer.writerow([row.scheme, f"{row.lambda_1:.17g}", ms_bound,
                             f"{row.r_as:.17g}", f"{row.empirical_rate:.17g}",
                             f"{row.clamp_rate:.6g}", int(row.moment_exact)])


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run the full pipeline for ``config``."""
    config.validate()
    return ConsensusExperiment(config).run()
