"""
Comparison Reports

Iterations needed by each scheme to bring the relative mean squared error below a
threshold, and the first iteration at which two schemes' mean curves swap order.
"""

import csv
import glob
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from netsim import ErrorTrajectory, load_trajectory

logger = logging.getLogger(__name__)

TRAJECTORY_SUFFIX = ".trajectory.csv"
NOT_REACHED = "not reached"
NO_CROSSING = "none"


@dataclass
class ThresholdRow:
    scheme: str
    threshold: float
    iterations: Optional[int]  # None when the threshold is never reached


@dataclass
class CrossingRow:
    first: str
    second: str
    iteration: Optional[int]  # None when the curves never swap order


@dataclass
class CompareTable:
    thresholds: List[ThresholdRow] = field(default_factory=list)
    crossings: List[CrossingRow] = field(default_factory=list)

    def iterations_to(self, scheme: str, threshold: float) -> Optional[int]:
        for row in self.thresholds:
            if row.scheme == scheme and row.threshold == threshold:
                return row.iterations
        raise KeyError(f"No entry for scheme '{scheme}' at threshold {threshold}")

    def crossing(self, first: str, second: str) -> Optional[int]:
        for row in self.crossings:
            if {row.first, row.second} == {first, second}:
                return row.iteration
        raise KeyError(f"No crossing entry for '{first}' / '{second}'")

    def format(self) -> str:
        """Plain-text rendering for the terminal."""
        lines = ["scheme            threshold   iterations"]
        for row in self.thresholds:
            shown = NOT_REACHED if row.iterations is None else str(row.iterations)
            lines.append(f"{row.scheme:<16}  {row.threshold:<10g}  {shown}")
        if self.crossings:
            lines.append("")
            lines.append("first             second            crossing")
            for row in self.crossings:
                shown = NO_CROSSING if row.iteration is None else str(row.iteration)
                lines.append(f"{row.first:<16}  {row.second:<16}  {shown}")
        return "\n".join(lines)


def iterations_to_threshold(trajectory: ErrorTrajectory, threshold: float) -> Optional[int]:
    """Smallest k with mse[k] / mse[0] <= threshold, or None."""
    hits = np.flatnonzero(trajectory.relative <= threshold)
    return int(hits[0]) if hits.size else None


def first_crossing(first: ErrorTrajectory, second: ErrorTrajectory) -> Optional[int]:
    """First k at which the order of the two mean curves flips, or None."""
    signs = np.sign(first.mse - second.mse)
    nonzero = np.flatnonzero(signs)
    if nonzero.size == 0:
        return None
    initial = signs[nonzero[0]]
    flipped = np.flatnonzero(signs[nonzero[0]:] == -initial)
    return int(nonzero[0] + flipped[0]) if flipped.size else None


def compare_report(trajectories: Dict[str, ErrorTrajectory], thresholds: Sequence[float]) -> CompareTable:
    """
    Threshold and crossing table for a set of schemes.

    Args:
        trajectories: Scheme label to trajectory; all must share the horizon.
        thresholds: Relative error levels.

    Returns:
        The table, rows in the given scheme order.
    """
    horizons = {trajectory.horizon for trajectory in trajectories.values()}
    if len(horizons) > 1:
        raise ValueError(f"Trajectories have different horizons: {sorted(horizons)}")

    table = CompareTable()
    names = list(trajectories)
    for name in names:
        for threshold in thresholds:
            table.thresholds.append(
                ThresholdRow(name, float(threshold), iterations_to_threshold(trajectories[name], threshold)))
    for a in range(len(names)):
        for b in range(a + 1, len(names)):
            first, second = names[a], names[b]
            table.crossings.append(
                CrossingRow(first, second, first_crossing(trajectories[first], trajectories[second])))
    return table


def save_compare_report(table: CompareTable, summary_path: str, crossings_path: str) -> None:
    """Write summary.csv (scheme,threshold,iterations) and crossings.csv (first,second,iteration)."""
    with open(summary_path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["scheme", "threshold", "iterations"])
        for row in table.thresholds:
            writer.writerow([row.scheme, f"{row.threshold:g}",
                             NOT_REACHED if row.iterations is None else row.iterations])
    with open(crossings_path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["first", "second", "iteration"])
        for row in table.crossings:
            writer.writerow([row.first, row.second, NO_CROSSING if row.iteration is None else row.iteration])
    logger.info(f"Wrote comparison tables to {summary_path} and {crossings_path}")


def load_trajectories(directory: str) -> Dict[str, ErrorTrajectory]:
    """All <label>.trajectory.csv files in a directory, keyed by label, sorted by label."""
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"Results directory not found: {directory}")
    paths = sorted(glob.glob(os.path.join(directory, "*" + TRAJECTORY_SUFFIX)))
    if not paths:
        raise FileNotFoundError(f"No '*{TRAJECTORY_SUFFIX}' files in {directory}")
    return {os.path.basename(path)[:-len(TRAJECTORY_SUFFIX)]: load_trajectory(path) for path in paths}
