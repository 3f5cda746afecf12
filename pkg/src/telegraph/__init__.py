"""
Network matrices of uniform multiconductor transmission lines.

The chain, ABCD, admittance and impedance matrices are computed straight
from the per-unit-length constants ``L, C, R, G`` with matrix functions
that never diagonalize, together with the scalar constants of their
frequency-domain growth envelopes and a harness that checks those
envelopes and the algebraic identities numerically.
"""
from .errors import (
    BranchCut, ConvergenceFailure, DimensionMismatch, DomainError, NonFinite,
    ParseError, SelfCheckMismatch, ShortCircuit, Singular, TelegraphError,
    UnknownCheck, ValidationFailure,
)
from .line import BoundParams, LineConstants, ValidationReport, bound_params, validate
from .netparams import (
    abcd_blockwise, abcd_direct, abscissa, admittance, chain_matrix, impedance,
    lead_factor,
)

__version__ = "0.1.0"

__all__ = [
    "TelegraphError", "DimensionMismatch", "NonFinite", "BranchCut", "ConvergenceFailure",
    "Singular", "DomainError", "ShortCircuit", "ValidationFailure", "ParseError",
    "UnknownCheck", "SelfCheckMismatch",
    "LineConstants", "ValidationReport", "BoundParams", "validate", "bound_params",
    "abscissa", "chain_matrix", "abcd_direct", "abcd_blockwise", "admittance",
    "impedance", "lead_factor",
]
