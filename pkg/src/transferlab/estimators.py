"""scikit-learn style wrappers.

Only the dyadic decomposition is a genuine data transformer (samples of grid
values in, block features out).  The spectrum and determinant estimators
take their "data" from the map and weight parameters; ``fit`` ignores ``X``
and the fitted objects then act on coefficient vectors or on ``z``.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import ConfigError
from .determinants import determinant_series, determinant_zeros
from .dynamics import ExpandingCircleMap, LinearToralMap, map_from_spec, weight_from_spec
from .fourier_dyadic import GridFunction, dyadic_blocks, holder_norm_star, top_index
from .transfer_op import assemble_expanding, assemble_hyperbolic, resonances

__all__ = ["DyadicDecomposer", "TransferOperatorSpectrum", "DynamicalDeterminant"]

_DOUBLING = {"kind": "expanding-circle", "k": 2, "eps": 0.0}
_UNIT = {"kind": "constant", "value": 1.0}


def _check_samples(X):
    """2D array of finite (possibly complex) grid samples; complex-safe ``check_array``."""
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ConfigError(f"expected a non-empty 2D array (n_samples, n_points), got shape {X.shape}")
    if not np.issubdtype(X.dtype, np.number):
        raise ConfigError("samples must be numeric")
    if not np.all(np.isfinite(X)):
        raise ConfigError("samples contain NaN or inf")
    return X


class DyadicDecomposer(TransformerMixin, BaseEstimator):
    """Per-sample dyadic block sup norms ``||u_n||_inf`` for ``n <= n_max``.

    Each row of ``X`` holds a function sampled on the 1D grid ``j / N``.

    Parameters
    ----------
    n_max : int or None
        Top block; ``None`` uses the largest block below Nyquist.
    p : float
        Exponent used by :meth:`norm`.
    """

    def __init__(self, n_max=None, p=0.5):
        self.n_max = n_max
        self.p = p

    def fit(self, X, y=None):
        X = _check_samples(X)
        self.n_features_in_ = X.shape[1]
        self.n_max_ = top_index(X.shape[1]) if self.n_max is None else int(self.n_max)
        if self.n_max_ < 0:
            raise ConfigError("grid too small for a dyadic decomposition")
        return self

    def _rows(self, X):
        check_is_fitted(self, "n_max_")
        X = _check_samples(X)
        if X.shape[1] != self.n_features_in_:
            raise ConfigError(f"expected {self.n_features_in_} grid points, got {X.shape[1]}")
        return [GridFunction(row) for row in X]

    def transform(self, X):
        out = []
        for u in self._rows(X):
            dec = dyadic_blocks(u, n_max=self.n_max_, warn=False)
            sup = dec.sup_norms()
            out.append([sup[n] for n in range(self.n_max_ + 1)])
        return np.asarray(out, dtype=float)

    def norm(self, X):
        """``||u||_{C^p_*}`` per sample."""
        return np.array([holder_norm_star(u, self.p, self.n_max_) for u in self._rows(X)])


class _MapEstimator(BaseEstimator):
    def _model(self):
        model = map_from_spec(_DOUBLING if self.map is None else self.map)
        g = weight_from_spec(_UNIT if self.weight is None else self.weight)
        return model, g


class TransferOperatorSpectrum(_MapEstimator):
    """Truncated transfer operator and its accepted resonances.

    After ``fit``: ``operator_`` (the matrix at ``N_f``), ``report_`` (the
    :class:`~transferlab.transfer_op.ResonanceReport`) and ``resonances_``.
    ``transform`` applies the operator to Fourier coefficient vectors.
    """

    def __init__(self, map=None, weight=None, N_f=32, p=1.0, q=-1.0, refinement=2,
                 stability_tol=1e-6, margin=0.05, threads=1):
        self.map = map
        self.weight = weight
        self.N_f = N_f
        self.p = p
        self.q = q
        self.refinement = refinement
        self.stability_tol = stability_tol
        self.margin = margin
        self.threads = threads

    def fit(self, X=None, y=None):
        model, g = self._model()
        if isinstance(model, ExpandingCircleMap):
            self.operator_ = assemble_expanding(model, g, self.N_f, threads=self.threads)
            q, cones = None, None
        else:
            cones = model.adapted_cones() if isinstance(model, LinearToralMap) else None
            self.operator_ = assemble_hyperbolic(model, g, self.N_f, self.p, self.q, cones, threads=self.threads)
            q = self.q
        self.report_ = resonances(model, g, self.N_f, self.p, q, cones=cones, refinement=self.refinement,
                                  stability_tol=self.stability_tol, margin=self.margin, threads=self.threads)
        self.resonances_ = np.asarray(self.report_.eigenvalues, dtype=complex)
        self.n_features_in_ = self.operator_.size
        return self

    def transform(self, X):
        check_is_fitted(self, "operator_")
        X = _check_samples(X)
        if X.shape[1] != self.operator_.size:
            raise ConfigError(f"expected coefficient vectors of length {self.operator_.size}")
        return X @ self.operator_.matrix.T


class DynamicalDeterminant(_MapEstimator):
    """Determinant series from periodic orbits; ``predict(z)`` evaluates ``d(z)``.

    After ``fit``: ``series_``, ``coefficients_``, ``zeros_`` (list of
    ``(z, order)``) and ``reliability_radius_``.
    """

    def __init__(self, map=None, weight=None, M=12, agree_tol=1e-8, cluster_tol=1e-6, threads=1):
        self.map = map
        self.weight = weight
        self.M = M
        self.agree_tol = agree_tol
        self.cluster_tol = cluster_tol
        self.threads = threads

    def fit(self, X=None, y=None):
        model, g = self._model()
        self.series_ = determinant_series(model, g, self.M, threads=self.threads)
        self.coefficients_ = np.asarray([complex(a) for a in self.series_.coefficients])
        self.zeros_, self.zeros_diagnostic_ = determinant_zeros(self.series_, agree_tol=self.agree_tol,
                                                                cluster_tol=self.cluster_tol)
        self.reliability_radius_ = self.series_.reliability_radius
        return self

    def predict(self, z):
        check_is_fitted(self, "series_")
        z = np.asarray(z, dtype=complex)
        if not np.all(np.isfinite(z)):
            raise ConfigError("z must be finite")
        return self.series_.evaluate(z)
