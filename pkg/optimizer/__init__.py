from .baselines import (
    DisconnectedGraphError,
    best_start,
    feasible_start,
    metropolis_weights,
    sgbw_weights,
)
from .subgradient import (
    NoFeasiblePointError,
    Objective,
    OptimizationResult,
    SubgradientSchedule,
    TraceEntry,
    optimize,
    save_trace,
)
