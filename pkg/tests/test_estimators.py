import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from transferlab import ConfigError, DynamicalDeterminant, DyadicDecomposer, TransferOperatorSpectrum
from transferlab.fourier_dyadic import GridFunction, holder_norm_star

HALF = {"kind": "constant", "value": 0.5}


def test_params_and_clone():
    est = TransferOperatorSpectrum(weight=HALF, N_f=16)
    assert est.get_params()["N_f"] == 16
    c = clone(est.set_params(N_f=24))
    assert c.N_f == 24 and c.weight == HALF and not hasattr(c, "operator_")
    assert clone(DyadicDecomposer(p=0.7)).get_params() == {"n_max": None, "p": 0.7}


def test_decomposer_modes():
    X = np.stack([GridFunction.mode(4, 64).values, GridFunction.mode(16, 64).values])
    dec = DyadicDecomposer(p=0.5).fit(X)
    F = dec.transform(X)
    assert F.shape == (2, dec.n_max_ + 1)
    assert np.argmax(F[0]) == 2 and np.argmax(F[1]) == 4
    assert dec.norm(X) == pytest.approx([holder_norm_star(GridFunction(x), 0.5) for x in X])


def test_decomposer_validation():
    with pytest.raises(NotFittedError):
        DyadicDecomposer().transform(np.ones((1, 8)))
    dec = DyadicDecomposer().fit(np.ones((2, 32)))
    for bad in (np.ones((1, 16)), np.full((1, 32), np.nan), np.array([["a"] * 32])):
        with pytest.raises(ConfigError):
            dec.transform(bad)


def test_decomposer_in_pipeline():
    X = np.random.default_rng(0).standard_normal((3, 64))
    pipe = make_pipeline(DyadicDecomposer(), FunctionTransformer(np.log1p))
    assert pipe.fit_transform(X).shape == (3, DyadicDecomposer().fit(X).n_max_ + 1)


def test_spectrum_halfweight():  # [DERIVED] L 1 = 1 is the only resonance above 1/2
    est = TransferOperatorSpectrum(weight=HALF, N_f=16).fit()
    assert est.resonances_ == pytest.approx([1.0])
    e0 = np.zeros((1, est.operator_.size))
    e0[0, est.operator_.size // 2] = 1.0
    assert np.allclose(est.transform(e0), e0)


def test_determinant_predict():  # [DERIVED] d(z) = 1 - 2 z for weight 1
    est = DynamicalDeterminant(M=10).fit()
    z = np.array([0.0, 0.25, 0.5j])
    assert np.allclose(est.predict(z), 1 - 2 * z, atol=1e-10)
    assert est.zeros_[0][0] == pytest.approx(0.5)
    with pytest.raises(NotFittedError):
        DynamicalDeterminant().predict(0.1)
