from .consensus import (
    ErrorTrajectory,
    load_trajectory,
    monte_carlo_mse,
    run_consensus,
    save_trajectory,
    trial_stream,
)
from .sampler import (
    ModelNotPSDError,
    TopologySampler,
    build_sampler,
    draw_topologies,
    estimate_link_moments,
    exact_joint_distribution,
    implied_covariance,
    sample_topology,
)
