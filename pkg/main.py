#!/usr/bin/env python3
"""
Consensus weight design for random networks with correlated link failures.

Verbs:
    generate    write the supergraph and link model files
    optimize    design the weights of one scheme
    simulate    Monte Carlo error trajectory for a weight file
    experiment  full pipeline over all configured schemes
    report      threshold and crossing tables from existing trajectory files
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from expcli import (
    ConsensusExperiment,
    ExperimentConfig,
    Scheme,
    compare_report,
    load_config,
    load_trajectories,
    run_experiment,
    save_compare_report,
    save_config,
)
from moments import load_weights, save_weights
from netsim import save_trajectory
from optimizer import save_trace

logger = logging.getLogger("consensus_design")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="YAML experiment configuration")
    common.add_argument("--seed", type=int, help="Master seed (64-bit unsigned)")
    common.add_argument("--out", type=str, help="Output directory")
    common.add_argument("--scheme", action="append", metavar="NAME[:N]",
                        help="metropolis, sgbw, phi:<n> or psi:<n>; repeatable")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--horizon", type=int, help="Consensus iterations K")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="Warnings and errors only")

    parser = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    verbs = parser.add_subparsers(dest="command", required=True)
    verbs.add_parser("generate", parents=[common], help="Write graph and correlation files")
    verbs.add_parser("optimize", parents=[common], help="Design weights for one scheme")
    simulate = verbs.add_parser("simulate", parents=[common], help="Simulate a weight file")
    simulate.add_argument("--weights", type=str, required=True, help="Weight file to simulate")
    verbs.add_parser("experiment", parents=[common], help="Run the full pipeline")
    verbs.add_parser("report", parents=[common], help="Tables from trajectory CSVs in --out")
    return parser.parse_args(argv)


def configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Load the configuration file (or defaults) and apply command-line overrides."""
    config = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.output_dir = args.out
    if args.scheme:
        config.schemes = list(args.scheme)
    if args.trials is not None:
        config.trials = args.trials
    if args.horizon is not None:
        config.horizon = args.horizon
    config.validate()
    return config


def command_generate(config: ExperimentConfig) -> None:
    experiment = ConsensusExperiment(config)
    for path in experiment.write_network(config.output_dir):
        print(path)
    save_config(config, os.path.join(config.output_dir, "config.resolved.yaml"))


def command_optimize(config: ExperimentConfig) -> None:
    if len(config.schemes) != 1:
        raise ValueError(f"optimize designs exactly one scheme, got {config.schemes}")
    scheme = Scheme.parse(config.schemes[0])
    experiment = ConsensusExperiment(config)
    weights, result = experiment.design(scheme)
    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, f"{scheme.label}.weights.txt")
    save_weights(weights, path)
    print(path)
    if result is not None:
        save_trace(result, os.path.join(config.output_dir, f"{scheme.label}.trace.csv"))
        print(f"{scheme}: best value {result.best_value:.10g} after {result.iterations_used} iterations")


def command_simulate(config: ExperimentConfig, weights_path: str) -> None:
    experiment = ConsensusExperiment(config)
    model = experiment.prepare_network()
    weights = load_weights(weights_path, model.n_edges)
    trajectory = experiment.simulate(weights)
    label = os.path.basename(weights_path).split(".")[0]
    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, f"{label}.trajectory.csv")
    save_trajectory(trajectory, path)
    print(path)
    print(f"mse[0]={trajectory.mse[0]:.6g}  mse[{trajectory.horizon}]={trajectory.mse[-1]:.6g}")


def command_experiment(config: ExperimentConfig) -> None:
    report = run_experiment(config)
    print(report.table.format())


def command_report(config: ExperimentConfig) -> None:
    trajectories = load_trajectories(config.output_dir)
    table = compare_report(trajectories, config.thresholds)
    save_compare_report(table, os.path.join(config.output_dir, "summary.csv"),
                        os.path.join(config.output_dir, "crossings.csv"))
    print(table.format())


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_arguments(argv)
    configure_logging(args)
    try:
        config = resolve_config(args)
        if args.command == "generate":
            command_generate(config)
        elif args.command == "optimize":
            command_optimize(config)
        elif args.command == "simulate":
            command_simulate(config, args.weights)
        elif args.command == "experiment":
            command_experiment(config)
        elif args.command == "report":
            command_report(config)
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        logger.debug("Traceback:", exc_info=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
