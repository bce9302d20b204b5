from .geometric_graph import (
    GenerationResult,
    Supergraph,
    generate_connected_geometric,
    generate_geometric,
    geometric_from_coordinates,
)
from .graph_io import load_correlations, load_graph, load_model, save_correlations, save_graph
from .link_model import (
    LinkStatModel,
    MissingCoordinatesError,
    ModelReport,
    assign_probabilities,
    build_correlations,
    deterministic_model,
    independent_model,
    spatial_model,
    validate_model,
)
