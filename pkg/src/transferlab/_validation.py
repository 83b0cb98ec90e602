"""Exceptions and small input-validation helpers shared across the package."""
import numbers

import numpy as np


class TransferLabError(Exception):
    """Base class for errors raised by transferlab."""


class ConfigError(TransferLabError, ValueError):
    """Invalid map, weight, cone or experiment configuration."""


class NumericalError(TransferLabError, RuntimeError):
    """A numerical procedure failed (non-convergence, degenerate fit, ...)."""


class ConvergenceError(NumericalError):
    pass


class TruncationWarning(UserWarning):
    """Input carries frequency mass the truncated dyadic decomposition cannot see."""


def check_int(value, name, minimum=None, maximum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ConfigError(f"{name} must be <= {maximum}, got {value}")
    return value


def check_real(value, name, minimum=None, strict=False):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value}")
    if minimum is not None:
        if strict and value <= minimum:
            raise ConfigError(f"{name} must be > {minimum}, got {value}")
        if not strict and value < minimum:
            raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_grid_values(values):
    """Validate samples of a periodic function on a uniform 1D or 2D grid."""
    values = np.asarray(values, dtype=complex)
    if values.ndim not in (1, 2):
        raise ConfigError(f"grid values must be 1D or 2D, got ndim={values.ndim}")
    n = values.shape[0]
    if any(s != n for s in values.shape):
        raise ConfigError(f"grid must be square, got shape {values.shape}")
    if n < 2 or n & (n - 1):
        raise ConfigError(f"grid size must be a power of two >= 2, got {n}")
    if not np.all(np.isfinite(values)):
        raise ConfigError("grid values must be finite")
    return values


def check_integer_matrix(matrix):
    arr = np.asarray(matrix)
    if arr.shape != (2, 2):
        raise ConfigError(f"toral matrix must be 2x2, got shape {arr.shape}")
    if not np.all(np.equal(np.mod(arr, 1), 0)):
        raise ConfigError("toral matrix must have integer entries")
    return arr.astype(np.int64)
