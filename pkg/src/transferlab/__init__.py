"""Numerical laboratory for transfer operators, dyadic Hölder norms and dynamical determinants."""
__version__ = "0.1.0"

from ._validation import ConfigError, ConvergenceError, NumericalError, TransferLabError, TruncationWarning
from .determinants import (DeterminantSeries, bound_estimate, compare_zeros_eigenvalues, determinant_series,
                           determinant_zeros, periodic_points, trace_sum)
from .dynamics import (ExpandingCircleMap, LinearToralMap, LocalBranch, PerturbedToralMap, Weight,
                       map_from_spec, weight_from_spec)
from .estimators import DynamicalDeterminant, DyadicDecomposer, TransferOperatorSpectrum
from .fourier_dyadic import ConeSystem, GridFunction, aniso_norm, dyadic_blocks, holder_norm_star
from .kernel_lab import Amplitude, kernel_bound_check, kernel_V
from .transfer_op import LinkageRelation, ResonanceReport, assemble_expanding, assemble_hyperbolic, resonances

__all__ = [
    "__version__",
    "TransferLabError", "ConfigError", "NumericalError", "ConvergenceError", "TruncationWarning",
    "GridFunction", "ConeSystem", "dyadic_blocks", "holder_norm_star", "aniso_norm",
    "ExpandingCircleMap", "LinearToralMap", "PerturbedToralMap", "LocalBranch", "Weight",
    "map_from_spec", "weight_from_spec",
    "assemble_expanding", "assemble_hyperbolic", "resonances", "ResonanceReport", "LinkageRelation",
    "DeterminantSeries", "periodic_points", "trace_sum", "determinant_series", "determinant_zeros",
    "bound_estimate", "compare_zeros_eigenvalues",
    "Amplitude", "kernel_V", "kernel_bound_check",
    "DyadicDecomposer", "TransferOperatorSpectrum", "DynamicalDeterminant",
]
