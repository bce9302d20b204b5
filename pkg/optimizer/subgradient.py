"""
Feasible/Infeasible Switching Subgradient Method

Minimizes phi_n subject to phi_1 < 1. At a feasible point the step follows a
subgradient of phi_n; at an infeasible point it follows a subgradient of the
constraint function phi_1. Steps move along the normalized subgradient, so the
step length is the distance the weights move. The best feasible iterate is returned.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from moments import WeightVector
from spectrum import as_model, evaluate
from spectrum.objectives import ModelOrGraph
from supergraph import deterministic_model

logger = logging.getLogger(__name__)

STEP_RULES = ("polyak", "constant", "sqrt", "harmonic")
OBJECTIVE_KINDS = ("phi", "psi")
DEFAULT_STEP_LENGTH = 0.1
LEVEL_FRACTION = 0.1  # initial level gap as a fraction of the first feasible value
LEVEL_PATIENCE = 25  # iterations without a half-gap improvement before the gap is halved
MIN_LEVEL_GAP = 1e-12


@dataclass
class SubgradientSchedule:
    """
    Step lengths and stopping rules.

    ``scale`` is the longest step, measured in weight norm. The ``polyak`` rule aims
    each feasible step at a target level a gap below the best value so far and halves
    the gap when progress stalls; infeasible steps aim just inside the constraint.
    The other rules take scale, scale/sqrt(t) or scale/t.
    """
    step_rule: str = "polyak"
    scale: Optional[float] = DEFAULT_STEP_LENGTH
    max_iters: int = 2000
    margin: float = 1e-3  # feasibility means phi_1 < 1 - margin
    target_gap: Optional[float] = None  # stop when the best value improved less than this ...
    patience: int = 200  # ... over this many iterations
    log_every: int = 100

    def __post_init__(self):
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"step_rule must be one of {STEP_RULES}, got '{self.step_rule}'")
        if self.scale is None:
            self.scale = DEFAULT_STEP_LENGTH
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if not (0.0 < self.margin < 1.0):
            raise ValueError(f"margin must lie in (0, 1), got {self.margin}")
        if self.patience < 1:
            raise ValueError(f"patience must be at least 1, got {self.patience}")

    def step(self, t: int, scale: Optional[float] = None) -> float:
        """Step length at iteration t (1-based); the cap for the polyak rule."""
        scale = self.scale if scale is None else scale
        if self.step_rule in ("constant", "polyak"):
            return scale
        if self.step_rule == "sqrt":
            return scale / math.sqrt(t)
        return scale / t


class _TargetLevel:
    """Level bookkeeping of the polyak rule."""

    def __init__(self):
        self.gap: Optional[float] = None
        self.anchor = math.inf
        self.stalled = 0

    def update(self, best_value: float) -> None:
        if self.gap is None:
            self.gap = max(LEVEL_FRACTION * abs(best_value), 1e-6)
            self.anchor = best_value
            return
        if self.anchor - best_value >= 0.5 * self.gap:
            self.anchor, self.stalled = best_value, 0
            return
        self.stalled += 1
        if self.stalled >= LEVEL_PATIENCE:
            self.gap = max(0.5 * self.gap, MIN_LEVEL_GAP)
            self.anchor, self.stalled = best_value, 0


@dataclass(frozen=True)
class Objective:
    """phi_n on the random network or psi_n on the static one."""
    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise ValueError(f"Objective kind must be one of {OBJECTIVE_KINDS}, got '{self.kind}'")
        if self.n < 1:
            raise ValueError(f"Objective index must be positive, got {self.n}")

    @classmethod
    def parse(cls, text: str) -> "Objective":
        """Parse 'phi:30' or 'psi:1'."""
        kind, sep, index = text.partition(":")
        if not sep or not index.strip().isdigit():
            raise ValueError(f"Objective must look like 'phi:<n>' or 'psi:<n>', got '{text}'")
        return cls(kind.strip().lower(), int(index))

    @property
    def label(self) -> str:
        return f"{self.kind}_{self.n}"


@dataclass
class TraceEntry:
    iteration: int
    value: float  # objective at the iterate
    feasible: bool
    step: float


@dataclass
class OptimizationResult:
    best_weights: WeightVector
    best_value: float
    trace: List[TraceEntry] = field(repr=False)
    iterations_used: int
    objective: Optional[Objective] = None

    @property
    def best_values(self) -> np.ndarray:
        """Running best feasible value per iteration (inf before the first feasible iterate)."""
        values = np.array([entry.value if entry.feasible else np.inf for entry in self.trace])
        return np.minimum.accumulate(values)


class NoFeasiblePointError(RuntimeError):
    """No iterate satisfied phi_1 < 1 - margin; ``trace`` holds every iterate visited."""

    def __init__(self, message: str, trace: Optional[List[TraceEntry]] = None):
        super().__init__(message)
        self.trace = trace or []


def optimize(objective: Objective, model_or_graph: ModelOrGraph, init: WeightVector,
             schedule: Optional[SubgradientSchedule] = None, method: str = "lapack") -> OptimizationResult:
    """
    Minimize phi_n (or psi_n) over the weights, subject to mean-square convergence.

    Args:
        objective: Which member of the family to minimize.
        model_or_graph: Link model; a bare supergraph means the static network.
            psi objectives always use the static network of the given graph.
        init: Starting weights.
        schedule: Step sizes and stopping rules.
        method: Eigensolver.

    Returns:
        The best feasible iterate and the full trace.
    """
    schedule = schedule or SubgradientSchedule()
    model = as_model(model_or_graph)
    if objective.kind == "psi":
        model = deterministic_model(model.graph)
    n_nodes = model.graph.n_nodes
    if not (1 <= objective.n <= n_nodes - 1):
        raise ValueError(f"Objective index must lie in [1, {n_nodes - 1}], got {objective.n}")

    x = WeightVector(init.values).values.copy()
    if x.shape != (model.n_edges,):
        raise ValueError(f"init must have {model.n_edges} weights, got {x.shape[0]}")

    n = objective.n
    polyak = schedule.step_rule == "polyak"
    level = _TargetLevel()
    bound = 1.0 - schedule.margin
    best_x: Optional[np.ndarray] = None
    best_value = math.inf
    stale = 0
    trace: List[TraceEntry] = []

    for t in range(schedule.max_iters):
        if not np.all(np.isfinite(x)):
            logger.warning(f"{objective.label}: non-finite weights at iteration {t}, stopping")
            break
        state = evaluate(x, model, method)
        value = state.value(n)
        constraint = state.value(1)
        feasible = constraint < bound

        if feasible and value < best_value:
            gain = best_value - value
            best_value, best_x = value, x.copy()
            stale = 0 if schedule.target_gap is None or gain > schedule.target_gap else stale + 1
        else:
            stale += 1

        direction = state.subgradient(n if feasible else 1)
        norm = float(np.linalg.norm(direction))
        if not (math.isfinite(value) and math.isfinite(norm)):
            logger.warning(f"{objective.label}: non-finite objective or subgradient at iteration {t}, stopping")
            break

        cap = schedule.step(t + 1)
        if polyak and norm > 0.0:
            if feasible:
                level.update(best_value)
                target = min(best_value, value) - level.gap
                step = min((value - target) / norm, cap)
            else:
                step = min((constraint - bound + 0.5 * schedule.margin) / norm, cap)
        else:
            step = cap
        trace.append(TraceEntry(t, value, feasible, step))

        if schedule.log_every and t % schedule.log_every == 0:
            logger.debug(f"{objective.label} iter {t}: value={value:.6g}, feasible={feasible}, "
                         f"best={best_value:.6g}, step={step:.3g}, gap={state.gap(n):.3g}")

        if norm == 0.0:
            logger.debug(f"{objective.label}: zero subgradient at iteration {t}, stopping")
            break
        if schedule.target_gap is not None and best_x is not None and stale >= schedule.patience:
            logger.debug(f"{objective.label}: no improvement above {schedule.target_gap:g} "
                         f"in {schedule.patience} iterations, stopping at {t}")
            break
        x = x - (step / norm) * direction

    if best_x is None:
        raise NoFeasiblePointError(
            f"No iterate with phi_1 < {1.0 - schedule.margin:g} in {len(trace)} iterations; "
            f"try rescaling the initial weights", trace)

    logger.info(f"{objective.label}: best value {best_value:.6g} after {len(trace)} iterations")
    return OptimizationResult(WeightVector(best_x), best_value, trace, len(trace), objective)


def save_trace(result: OptimizationResult, path: str) -> None:
    """Write the iterate trace as CSV with header iter,value,feasible,step."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["iter", "value", "feasible", "step"])
        for entry in result.trace:
            writer.writerow([entry.iteration, f"{entry.value:.17g}", int(entry.feasible), f"{entry.step:.17g}"])
    logger.info(f"Wrote optimization trace ({len(result.trace)} rows) to {path}")
