import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import chi_ref, psi_ref
from transferlab import ConfigError, TruncationWarning
from transferlab.fourier_dyadic import (ConeSystem, GridFunction, aniso_norm, apply_multiplier,
                                        band_limited_corpus, block_symbol, chi, classical_holder_norm,
                                        dyadic_blocks, holder_norm_star, kernel_l1_mass, psi_n,
                                        psi_n_sigma, psi_tilde_ell, top_index)

HORIZONTAL = ConeSystem(0.0, math.radians(20), math.pi / 2, math.radians(20))


# chi and the multipliers --------------------------------------------------------

@pytest.mark.parametrize("s, expected", [(0.5, 1.0), (3.0, 0.0), (1.5, 0.5)])  # [TRIVIAL]
def test_chi_examples(s, expected):
    assert chi(s) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("s", [1.01, 1.2, 1.37, 1.5, 1.73, 1.99])
def test_chi_matches_high_precision_oracle(s):  # [DERIVED] 50-digit mpmath evaluation
    assert chi(s) == pytest.approx(chi_ref(s), abs=1e-15)


def test_chi_monotone_and_bounded():
    s = np.linspace(0, 3, 3001)
    c = chi(s)
    assert np.all((c >= 0) & (c <= 1))
    assert np.all(np.diff(c) <= 0)


def test_chi_derivatives_finite():
    # finite differences up to order 6 stay finite on a fine grid
    s = np.linspace(0.9, 2.1, 4001)
    d = chi(s)
    for _ in range(6):
        d = np.diff(d) / (s[1] - s[0])
        assert np.all(np.isfinite(d))


@pytest.mark.parametrize("n, r, expected", [(1, 1.0, 0.0), (2, 4.0, 1.0)])  # [TRIVIAL]
def test_psi_n_trivial(n, r, expected):
    assert psi_n(n, r) == pytest.approx(expected, abs=1e-15)


def test_psi_2_at_3():  # [DERIVED] chi(0.75) - chi(1.5) from the oracle profile
    assert psi_n(2, 3.0) == pytest.approx(psi_ref(2, 3.0), abs=1e-15)
    assert psi_n(2, 3.0) == pytest.approx(0.5, abs=1e-15)


def test_psi_tilde_examples():
    assert psi_tilde_ell(0, 1.0) == 1.0  # [TRIVIAL]
    assert psi_tilde_ell(3, 64.0) == 0.0  # [DERIVED] support ends at 2^(l+2) = 32
    r = np.linspace(0, 40, 4001)
    on = psi_n(2, r) > 0
    # [PAPER] the widened multiplier equals 1 wherever psi_2 is nonzero
    assert np.all(psi_tilde_ell(2, r[on]) == 1.0)


def test_psi_sigma_examples():
    xi = np.array([16.0, 0.0])
    assert psi_n_sigma(4, "+", xi, HORIZONTAL) == pytest.approx(1.0)  # [DERIVED]
    assert psi_n_sigma(4, "-", xi, HORIZONTAL) == pytest.approx(0.0)  # [TRIVIAL]


def test_partition_of_unity_isotropic():
    n_max = 8
    k = np.arange(0, 2 ** (n_max - 1) + 1, dtype=float)
    total = sum(psi_n(n, k) for n in range(n_max + 1))
    assert np.max(np.abs(total - 1.0)) <= 1e-12


def test_partition_of_unity_anisotropic():
    n_max = 6
    k1, k2 = np.meshgrid(np.arange(-32, 33), np.arange(-32, 33), indexing="ij")
    xi = np.stack([k1, k2], axis=-1).astype(float)
    inside = np.hypot(k1, k2) <= 2 ** (n_max - 1)
    total = sum(psi_n_sigma(n, s, xi, HORIZONTAL) for n in range(n_max + 1) for s in "+-")
    assert np.max(np.abs(total[inside] - 1.0)) <= 1e-12


def test_support_exact():
    k = np.arange(0, 1025, dtype=float)
    for n in range(1, 10):
        outside = (k < 2.0 ** (n - 1)) | (k > 2.0 ** (n + 1))
        assert np.all(psi_n(n, k[outside]) == 0.0)


def test_almost_orthogonality_exact():
    u = GridFunction(np.random.default_rng(0).standard_normal(512))
    for m in range(8):
        for n in range(8):
            if abs(m - n) >= 5:
                prod = block_symbol(u, m) * block_symbol(u, n)
                assert np.all(prod == 0.0)


def test_l1_mass_uniform():
    mass = [kernel_l1_mass(512, n) for n in range(top_index(512) + 1)]
    assert max(mass) / min(mass) < 20


# GridFunction and blocks ----------------------------------------------------------

@given(st.integers(3, 7), st.integers(0, 2**31 - 1))
def test_roundtrip(logN, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(2**logN) + 1j * rng.standard_normal(2**logN)
    u = GridFunction(v)
    back = GridFunction.from_coefficients(u.coefficients)
    assert np.max(np.abs(back.values - v)) <= 1e-12 * np.max(np.abs(v))
    view = u.frequency_view()
    assert view.shape == (2**logN + 1,)  # symmetric index set -N/2..N/2


def test_apply_multiplier_examples():
    u = GridFunction.mode(4, 64)
    assert np.max(np.abs(apply_multiplier(u, lambda k: np.ones(k.shape[:-1])).values - u.values)) < 1e-12
    assert np.max(np.abs(apply_multiplier(u, lambda k: psi_n(2, k, vector=True)).values - u.values)) < 1e-12
    w = GridFunction.mode(1, 64)
    assert np.max(np.abs(apply_multiplier(w, lambda k: psi_n(2, k, vector=True)).values)) < 1e-15


def test_single_mode_lands_in_one_block():
    u = GridFunction.mode(16, 128)
    dec = dyadic_blocks(u)
    norms = dec.sup_norms()
    assert norms[4] == pytest.approx(1.0, abs=1e-12)
    assert all(v < 1e-14 for n, v in norms.items() if n != 4)


def test_two_modes_two_blocks():
    u = GridFunction.mode(2, 128) + GridFunction.mode(32, 128)
    norms = dyadic_blocks(u).sup_norms()
    assert norms[1] == pytest.approx(1.0) and norms[5] == pytest.approx(1.0)
    assert sum(v for n, v in norms.items() if n not in (1, 5)) < 1e-13


def test_reconstruction():
    rng = np.random.default_rng(1)
    c = np.zeros(256, dtype=complex)
    c[:20] = rng.standard_normal(20)
    c[-19:] = rng.standard_normal(19)
    u = GridFunction.from_coefficients(c)
    assert np.max(np.abs(dyadic_blocks(u).reconstruct().values - u.values)) < 1e-10


def test_zero_function():
    u = GridFunction.zeros(64)
    assert holder_norm_star(u, 1.0) == 0.0
    assert all(v == 0 for v in dyadic_blocks(u).sup_norms().values())
    assert aniso_norm(GridFunction.zeros(64, 2), 1.0, -1.0, HORIZONTAL) == 0.0


def test_top_band_warning():
    with pytest.warns(TruncationWarning):
        holder_norm_star(GridFunction.mode(120, 256), 0.5)


# norms ----------------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 4, 6])
def test_holder_norm_of_mode(n):  # [DERIVED] single block, sup 1
    assert holder_norm_star(GridFunction.mode(2**n, 512), 1.5) == pytest.approx(2 ** (1.5 * n), rel=1e-12)


def test_aniso_norm_examples():  # [DERIVED] single anisotropic block
    assert aniso_norm(GridFunction.mode((16, 0), 64), 1.0, -1.0, HORIZONTAL) == pytest.approx(16.0, rel=1e-12)
    assert aniso_norm(GridFunction.mode((0, 16), 64), 1.0, -1.0, HORIZONTAL) == pytest.approx(0.0625, rel=1e-12)


def test_classical_examples():
    assert classical_holder_norm(GridFunction(np.ones(64)), 0.5) == 1.0  # [TRIVIAL]
    u = GridFunction.mode(8, 256)
    c, d = classical_holder_norm(u, 0.5), holder_norm_star(u, 0.5)
    assert 0.25 <= c / d <= 4.0
    # [DERIVED] closed form: |e_8(x+h) - e_8(x)| = 2|sin(8 pi h)| on grid shifts h = s/256
    h = np.arange(1, 65) / 256
    expected = max(1.0, float(np.max(2 * np.abs(np.sin(8 * np.pi * h)) / h**0.5)))
    assert c == pytest.approx(expected, rel=1e-12)
    assert d == pytest.approx(8**0.5, rel=1e-12)


def test_classical_rejects_bad_exponent():
    with pytest.raises(ConfigError):
        classical_holder_norm(GridFunction(np.ones(8)), 1.0)


_band = st.lists(st.floats(-1, 1), min_size=9, max_size=9)


def _bandlimited(coeffs, N=64):
    c = np.zeros(N, dtype=complex)
    c[: len(coeffs)] = coeffs
    return GridFunction.from_coefficients(c)


@given(_band, _band, st.floats(-3, 3), st.sampled_from([0.3, 0.5, 0.7]))
def test_norm_axioms(a, b, lam, p):
    u, v = _bandlimited(a), _bandlimited(b)
    for norm in (lambda f: holder_norm_star(f, p), lambda f: classical_holder_norm(f, p)):
        nu, nv = norm(u), norm(v)
        assert nu >= 0
        assert norm(u * lam) == pytest.approx(abs(lam) * nu, rel=1e-9, abs=1e-12)
        assert norm(u + v) <= nu + nv + 1e-12
        if nu == 0:
            assert np.max(np.abs(u.values)) == 0


@given(_band, st.floats(-1, 1), st.floats(-1, 1))
def test_aniso_norm_axioms(a, lam_re, lam_im):
    c = np.zeros((64, 64), dtype=complex)
    c[0, : len(a)] = a
    c[1:4, 0] = a[:3]
    u = GridFunction.from_coefficients(c)
    lam = complex(lam_re, lam_im)
    n = aniso_norm(u, 1.0, -1.0, HORIZONTAL)
    assert aniso_norm(u * lam, 1.0, -1.0, HORIZONTAL) == pytest.approx(abs(lam) * n, rel=1e-9, abs=1e-12)


def test_corpus_ratio_bounds():
    corpus = band_limited_corpus()
    assert len(corpus) == 20
    with warnings.catch_warnings():
        warnings.simplefilter("error", TruncationWarning)
        for p in (0.3, 0.5, 0.7):
            r = [classical_holder_norm(u, p) / holder_norm_star(u, p) for u in corpus]
            assert 0.1 <= min(r) and max(r) <= 10.0
