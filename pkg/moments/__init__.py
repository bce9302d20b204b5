from .oracle import MomentEstimate, monte_carlo_moment_estimate, monte_carlo_moment_oracle
from .state_matrices import (
    ArrayLike,
    MomentMatrix,
    WeightVector,
    averaging_projector,
    edge_outer,
    error_moment_matrix,
    expected_W,
    moment_derivative,
    moment_derivatives_trace,
    moment_matrix,
    realized_state_matrix,
    weight_values,
)
from .weights_io import load_weights, save_weights
