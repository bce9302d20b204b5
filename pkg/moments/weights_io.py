"""Weight files: one line "e W_e" per edge, 1-based canonical index, 17 significant digits."""

import logging
import os
from typing import Optional

import numpy as np

from .state_matrices import WeightVector

logger = logging.getLogger(__name__)


def save_weights(weights: WeightVector, path: str) -> None:
    """Write weights so that reloading reproduces them bit for bit."""
    with open(path, "w") as handle:
        for e, value in enumerate(weights.values, start=1):
            handle.write(f"{e} {value:.17g}\n")
    logger.info(f"Wrote {len(weights)} weights to {path}")


def load_weights(path: str, n_edges: Optional[int] = None) -> WeightVector:
    """
    Read a weight file.

    Args:
        path: Weight file path.
        n_edges: Expected number of edges; checked when given.

    Returns:
        The weights in canonical edge order.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Weight file not found: {path}")

    entries = {}
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'e W_e'")
            entries[int(fields[0])] = float(fields[1])

    count = len(entries)
    if sorted(entries) != list(range(1, count + 1)):
        raise ValueError(f"{path}: edge indices must be exactly 1..{count}")
    if n_edges is not None and count != n_edges:
        raise ValueError(f"{path}: expected {n_edges} weights, found {count}")
    return WeightVector(np.array([entries[e] for e in range(1, count + 1)]))
