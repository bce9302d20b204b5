"""
Symmetric Eigendecomposition

Two solvers share one post-processing step (descending order, deterministic signs):
LAPACK through ``numpy.linalg.eigh`` and a cyclic Jacobi rotation solver.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-10
EIGENSOLVERS = ("lapack", "jacobi")


class AsymmetricMatrixError(ValueError):
    """Raised when a matrix handed to the symmetric solver is not symmetric."""


@dataclass
class SpectralDecomposition:
    """Eigenvalues in descending order; column i of ``eigenvectors`` pairs with eigenvalue i."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def top(self, n: int) -> np.ndarray:
        """The n leading eigenvectors as an N x n matrix."""
        return self.eigenvectors[:, :n]

    def projector(self, n: int) -> np.ndarray:
        """Sum of q_i q_i^T over the n leading eigenvectors."""
        q = self.top(n)
        return q @ q.T

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-12,
                max_sweeps: int = 100) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cyclic Jacobi eigenvalue algorithm for a real symmetric matrix.

    Sweeps the strictly upper triangle row by row, annihilating each off-diagonal
    entry with a plane rotation, until the off-diagonal Frobenius norm drops below
    ``tol`` times max(1, ||A||_F).

    Args:
        matrix: Symmetric input.
        tol: Relative stopping tolerance on the off-diagonal norm.
        max_sweeps: Upper bound on full sweeps.

    Returns:
        (eigenvalues, eigenvectors), unsorted.
    """
    a = np.array(matrix, dtype=float, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))

    for sweep in range(max_sweeps):
        off = math.sqrt(2.0) * float(np.linalg.norm(np.triu(a, 1)))
        if off < threshold:
            logger.debug(f"Jacobi converged after {sweep} sweep(s), off-norm {off:.3e}")
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                a[:, p] = c * col_p - s * a[:, q]
                a[:, q] = s * col_p + c * a[:, q]
                row_p = a[p, :].copy()
                a[p, :] = c * row_p - s * a[q, :]
                a[q, :] = s * row_p + c * a[q, :]
                a[p, q] = a[q, p] = 0.0

                vec_p = v[:, p].copy()
                v[:, p] = c * vec_p - s * v[:, q]
                v[:, q] = s * vec_p + c * v[:, q]
    else:
        logger.warning(f"Jacobi solver stopped after {max_sweeps} sweeps without converging")

    return np.diag(a).copy(), v


def sym_eig(matrix: np.ndarray, method: str = "lapack") -> SpectralDecomposition:
    """
    Eigendecomposition of a symmetric matrix, sorted descending.

    Each eigenvector's sign is fixed so its largest-magnitude component is positive.

    Args:
        matrix: Symmetric N x N input (asymmetry up to 1e-10 is tolerated).
        method: "lapack" or "jacobi".

    Returns:
        The decomposition.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"Expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("Matrix has non-finite entries")
    asymmetry = float(np.max(np.abs(a - a.T)))
    if asymmetry > SYMMETRY_TOLERANCE:
        raise AsymmetricMatrixError(f"Matrix asymmetry {asymmetry:.3e} exceeds {SYMMETRY_TOLERANCE:g}")
    a = 0.5 * (a + a.T)

    if method == "lapack":
        values, vectors = np.linalg.eigh(a)
    elif method == "jacobi":
        values, vectors = jacobi_eigh(a)
    else:
        raise ValueError(f"Unknown eigensolver '{method}', expected one of {EIGENSOLVERS}")

    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]

    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return SpectralDecomposition(values, vectors * signs)


def spectrum_table(matrix: np.ndarray, method: str = "lapack") -> List[Tuple[int, float]]:
    """Rows (1-based index, eigenvalue) in descending order, for CSV export."""
    values = sym_eig(matrix, method).eigenvalues
    return [(i, float(value)) for i, value in enumerate(values, start=1)]
