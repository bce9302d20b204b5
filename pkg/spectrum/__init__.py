from .eigen import (
    EIGENSOLVERS,
    AsymmetricMatrixError,
    SpectralDecomposition,
    jacobi_eigh,
    spectrum_table,
    sym_eig,
)
from .objectives import KyFanState, as_model, evaluate, is_feasible, phi_n, psi_n, subgrad_phi_n
from .rates import NotConsensusErrorVector, RateReport, mode_decomposition, rates, static_error_matrix
