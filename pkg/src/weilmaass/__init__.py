"""Fourier coefficients of vector-valued harmonic weak Maass forms.

The forms transform with the Weil representation attached to the lattice
(Z, N x^2).  Coefficients are computed with a Hejhal-type linear system on a
horocycle (phase 1) and extended to larger indices by direct Fourier
inversion (phase 2).
"""
from .bigarith import PrecisionContext, PrecisionError, make_context
from .maassform import (CoefficientTable, CongruenceError, HarmonicParams, PrincipalPart,
                        delta_to_index, index_to_delta)
from .solver import ErrorReport, SolveJob, extend_phase2, solve_phase1

__all__ = [
    "PrecisionContext", "PrecisionError", "make_context",
    "CoefficientTable", "CongruenceError", "HarmonicParams", "PrincipalPart",
    "delta_to_index", "index_to_delta",
    "ErrorReport", "SolveJob", "extend_phase2", "solve_phase1",
]

__version__ = "0.1.0"
