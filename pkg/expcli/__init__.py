from .config import (
    ConfigError,
    ExperimentConfig,
    GraphSource,
    Scheme,
    ScheduleOverrides,
    load_config,
    save_config,
)
from .experiment import ConsensusExperiment, ExperimentReport, RateRow, empirical_rate, run_experiment
from .report import (
    CompareTable,
    compare_report,
    first_crossing,
    iterations_to_threshold,
    load_trajectories,
    save_compare_report,
)
