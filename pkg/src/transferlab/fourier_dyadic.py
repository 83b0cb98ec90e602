"""Paley-Littlewood multipliers and dyadic Hölder norms on torus grids.

Functions live on the 1D or 2D torus sampled at ``j/N``.  Frequencies are
integer lattice points ``k`` (the mode ``e_k(x) = exp(2 pi i k.x)``) and every
multiplier is evaluated at ``|k|``, so a pure mode of norm ``2**n`` lands in
block ``n`` exactly.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._validation import ConfigError, TruncationWarning, check_grid_values

__all__ = [
    "chi",
    "psi_n",
    "psi_tilde_ell",
    "psi_n_sigma",
    "psi_tilde_ell_sigma",
    "ConeSystem",
    "GridFunction",
    "DyadicDecomposition",
    "apply_multiplier",
    "dyadic_blocks",
    "top_index",
    "cover_index",
    "grid_points",
    "block_symbol",
    "holder_norm_star",
    "aniso_norm",
    "classical_holder_norm",
    "kernel_l1_mass",
    "band_limited_corpus",
]

TOP_BAND_TOL = 1e-8


def _flat(t, exponent=1.0):
    # exp(-1/t**a) for t > 0, else 0
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-np.power(t[pos], -exponent))
    return out


def _step_down(s, exponent=1.0):
    """Smooth step equal to 1 for s <= 0 and 0 for s >= 1."""
    a = _flat(1.0 - np.asarray(s, dtype=float), exponent)
    b = _flat(s, exponent)
    return a / (a + b)


def chi(s):
    """Smooth cutoff: 1 on [0, 1], 0 on [2, inf), monotone in between.

    ``chi(s) = f(2 - s) / (f(2 - s) + f(s - 1))`` with ``f(t) = exp(-1/t)``.
    Scalar input gives a float, array input an array.
    """
    arr = np.asarray(s, dtype=float)
    out = _step_down(arr - 1.0)
    return float(out) if out.ndim == 0 else out


def _norms(xi, vector):
    xi = np.asarray(xi, dtype=float)
    if vector:
        return np.sqrt(np.sum(xi * xi, axis=-1))
    return np.abs(xi)


def _psi_radial(n, r):
    if n == 0:
        return chi(r)
    return chi(r / 2.0**n) - chi(r / 2.0 ** (n - 1))


def _psi_tilde_radial(ell, r):
    if ell == 0:
        return chi(r / 2.0)
    return chi(r / 2.0 ** (ell + 1)) - chi(r / 2.0 ** (ell - 2))


def psi_n(n, xi, vector=False):
    """Dyadic multiplier ``psi_n`` at frequency norm(s) ``xi``.

    With ``vector=True`` the last axis of ``xi`` holds frequency vectors.
    """
    if n < 0:
        raise ConfigError(f"dyadic index must be >= 0, got {n}")
    return _psi_radial(n, _norms(xi, vector))


def psi_tilde_ell(ell, xi, vector=False):
    """Widened multiplier, identically 1 on the support of ``psi_ell``."""
    if ell < 0:
        raise ConfigError(f"dyadic index must be >= 0, got {ell}")
    return _psi_tilde_radial(ell, _norms(xi, vector))


def _angle(xi):
    xi = np.asarray(xi, dtype=float)
    return np.arctan2(xi[..., 1], xi[..., 0])


def _angdist(theta, center):
    """Distance between directions on the projective circle (period pi)."""
    d = np.mod(np.asarray(theta, dtype=float) - center + np.pi / 2, np.pi) - np.pi / 2
    return np.abs(d)


@dataclass(frozen=True)
class ConeSystem:
    """Two closed double sectors Θ_+ and Θ_- in the frequency plane.

    Each sector is given by its center direction and half-width in radians
    and is symmetric under ξ -> -ξ.  ``phi_plus`` is 1 on Θ_+, 0 on Θ_-, and
    switches smoothly across both gaps; ``phi_minus = 1 - phi_plus``.

    ``prime`` optionally carries the second pair Θ'_± used for the two-pair
    cone-hyperbolicity condition.  ``tilde_shrink`` sets the inner cones
    Θ~_± and ``check_shrink`` the sector Θˇ_+ (Θˇ_- is its complement
    widened to swallow everything outside Θ_+).
    """

    plus_center: float
    plus_halfwidth: float
    minus_center: float
    minus_halfwidth: float
    transition_exponent: float = 1.0
    prime: "ConeSystem | None" = None
    tilde_shrink: float = 0.5
    check_shrink: float = 0.5

    def __post_init__(self):
        for name in ("plus_halfwidth", "minus_halfwidth"):
            w = getattr(self, name)
            if not 0 < w < np.pi / 2:
                raise ConfigError(f"{name} must lie in (0, pi/2), got {w}")
        gap = _angdist(self.plus_center, self.minus_center)
        if gap <= self.plus_halfwidth + self.minus_halfwidth:
            raise ConfigError("cones Θ_+ and Θ_- must intersect only at the origin")
        if not 0 < self.tilde_shrink < 1 or not 0 < self.check_shrink < 1:
            raise ConfigError("shrink factors must lie in (0, 1)")
        if self.transition_exponent <= 0:
            raise ConfigError("transition_exponent must be positive")

    # geometry -----------------------------------------------------------
    def in_plus(self, theta, interior=False):
        d = _angdist(theta, self.plus_center)
        return d < self.plus_halfwidth if interior else d <= self.plus_halfwidth

    def in_minus(self, theta, interior=False):
        d = _angdist(theta, self.minus_center)
        return d < self.minus_halfwidth if interior else d <= self.minus_halfwidth

    def swapped(self):
        return ConeSystem(self.minus_center, self.minus_halfwidth,
                          self.plus_center, self.plus_halfwidth,
                          self.transition_exponent, None,
                          self.tilde_shrink, self.check_shrink)

    # sphere functions ---------------------------------------------------
    def phi_plus(self, theta):
        theta = np.asarray(theta, dtype=float)
        a = self.exponent_safe
        start = self.plus_center + self.plus_halfwidth
        t = np.mod(theta - start, np.pi)
        g1 = np.mod(self.minus_center - self.minus_halfwidth - start, np.pi)
        g2_start = g1 + 2 * self.minus_halfwidth
        g2_end = np.pi - 2 * self.plus_halfwidth
        out = np.ones_like(t)
        in_gap1 = t < g1
        out[in_gap1] = _step_down(t[in_gap1] / g1, a)
        in_minus = (t >= g1) & (t <= g2_start)
        out[in_minus] = 0.0
        in_gap2 = (t > g2_start) & (t < g2_end)
        out[in_gap2] = 1.0 - _step_down((t[in_gap2] - g2_start) / (g2_end - g2_start), a)
        # exact values on the closed sectors
        out[self.in_plus(theta)] = 1.0
        out[self.in_minus(theta)] = 0.0
        return out

    def phi_minus(self, theta):
        return 1.0 - self.phi_plus(theta)

    @property
    def exponent_safe(self):
        return float(self.transition_exponent)

    def _one_sided(self, theta, center, inner, outer):
        s = (_angdist(theta, center) - inner) / (outer - inner)
        return 1.0 - _step_down(s, self.exponent_safe)

    def tilde_phi_minus(self, theta):
        """0 on Θ~_+, 1 outside Θ_+."""
        w = self.plus_halfwidth
        return self._one_sided(theta, self.plus_center, self.tilde_shrink * w, w)

    def tilde_phi_plus(self, theta):
        """1 outside Θ_-, 0 on Θ~_-."""
        w = self.minus_halfwidth
        return self._one_sided(theta, self.minus_center, self.tilde_shrink * w, w)

    def tilde_phi(self, sigma, theta):
        return self.tilde_phi_plus(theta) if sigma == "+" else self.tilde_phi_minus(theta)

    def phi(self, sigma, theta):
        return self.phi_plus(theta) if sigma == "+" else self.phi_minus(theta)

    def check_cones(self):
        """The pair Θˇ_±: Θˇ_+ inside Θ_+, Θˇ_- containing the closure of the complement of Θ_+."""
        w = self.plus_halfwidth
        inner = self.check_shrink * w
        outer = 0.5 * (1.0 + self.check_shrink) * w
        return ConeSystem(self.plus_center, inner,
                          self.plus_center + np.pi / 2, np.pi / 2 - outer,
                          self.transition_exponent)

    # serialization ------------------------------------------------------
    def to_dict(self):
        d = {
            "plus_center": float(self.plus_center),
            "plus_halfwidth": float(self.plus_halfwidth),
            "minus_center": float(self.minus_center),
            "minus_halfwidth": float(self.minus_halfwidth),
            "transition_exponent": float(self.transition_exponent),
            "tilde_shrink": float(self.tilde_shrink),
            "check_shrink": float(self.check_shrink),
        }
        if self.prime is not None:
            d["prime"] = self.prime.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        prime = d.pop("prime", None)
        return cls(**d, prime=None if prime is None else cls.from_dict(prime))

    @classmethod
    def adapted(cls, matrix, plus_halfwidth, minus_halfwidth, prime_halfwidths=None, **kw):
        """Cones centred on the contracting (Θ_+) and expanding (Θ_-) eigendirections of ``matrix.T``.

        ``matrix`` is the Jacobian ``DT``; frequencies are transported by its
        transpose.  ``prime_halfwidths=(w_plus, w_minus)`` adds a second pair
        on the same axes.
        """
        vals, vecs = np.linalg.eig(np.asarray(matrix, dtype=float).T)
        vals = np.real(vals)
        order = np.argsort(np.abs(vals))
        v_contract = np.real(vecs[:, order[0]])
        v_expand = np.real(vecs[:, order[-1]])
        a_plus = math.atan2(v_contract[1], v_contract[0])
        a_minus = math.atan2(v_expand[1], v_expand[0])
        prime = None
        if prime_halfwidths is not None:
            prime = cls(a_plus, prime_halfwidths[0], a_minus, prime_halfwidths[1], **kw)
        return cls(a_plus, plus_halfwidth, a_minus, minus_halfwidth, prime=prime, **kw)


def psi_n_sigma(n, sigma, xi, cones):
    """Anisotropic multiplier ``psi_{n,sigma}`` at frequency vectors ``xi`` (last axis 2)."""
    if sigma not in ("+", "-"):
        raise ConfigError(f"sigma must be '+' or '-', got {sigma!r}")
    r = _norms(xi, True)
    if n == 0:
        return chi(r) / 2.0
    return _psi_radial(n, r) * cones.phi(sigma, _angle(xi))


def psi_tilde_ell_sigma(ell, tau, xi, cones):
    """Widened anisotropic multiplier, 1 on the support of ``psi_{ell,tau}``."""
    r = _norms(xi, True)
    if ell == 0:
        return chi(r / 2.0)
    return _psi_tilde_radial(ell, r) * cones.tilde_phi(tau, _angle(xi))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples of a periodic function on the uniform grid ``j/N``."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", check_grid_values(self.values))

    @property
    def d(self):
        return self.values.ndim

    @property
    def N(self):
        return self.values.shape[0]

    @classmethod
    def from_callable(cls, func, N, d=1):
        return cls(func(grid_points(N, d)))

    @classmethod
    def mode(cls, k, N):
        """The pure Fourier mode ``exp(2 pi i k.x)``; ``k`` an int (1D) or a pair (2D)."""
        k = np.atleast_1d(np.asarray(k))
        x = grid_points(N, len(k))
        if len(k) == 1:
            return cls(np.exp(2j * np.pi * k[0] * x))
        return cls(np.exp(2j * np.pi * (x @ k.astype(float))))

    @classmethod
    def zeros(cls, N, d=1):
        return cls(np.zeros((N,) * d, dtype=complex))

    @classmethod
    def from_coefficients(cls, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        return cls(np.fft.ifftn(coeffs) * coeffs.size)

    @property
    def coefficients(self):
        """Fourier coefficients in numpy FFT order, normalised so ``e_k`` has coefficient 1."""
        return np.fft.fftn(self.values) / self.values.size

    def wavenumbers(self):
        """Integer frequencies matching :attr:`coefficients`, shape ``(N,)*d + (d,)``."""
        k = np.fft.fftfreq(self.N, 1.0 / self.N)
        grids = np.meshgrid(*([k] * self.d), indexing="ij")
        return np.stack(grids, axis=-1)

    def frequency_view(self):
        """Coefficients on the symmetric index set ``-N/2..N/2`` per axis.

        The Nyquist coefficient is split evenly between ``+N/2`` and ``-N/2``.
        """
        c = np.fft.fftshift(self.coefficients)  # index 0 <-> -N/2
        for axis in range(self.d):
            first = np.take(c, [0], axis=axis) / 2.0
            c = np.concatenate([first, np.delete(c, 0, axis=axis), first], axis=axis)
        return c

    @classmethod
    def from_frequency_view(cls, view):
        c = np.asarray(view, dtype=complex)
        for axis in range(c.ndim):
            first = np.take(c, [0], axis=axis) + np.take(c, [-1], axis=axis)
            rest = np.take(c, range(1, c.shape[axis] - 1), axis=axis)
            c = np.concatenate([first, rest], axis=axis)
        return cls.from_coefficients(np.fft.ifftshift(c))

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def __add__(self, other):
        return GridFunction(self.values + other.values)

    def __sub__(self, other):
        return GridFunction(self.values - other.values)

    def __mul__(self, scalar):
        return GridFunction(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(-self.values)

    def evaluate(self, points):
        """Trigonometric interpolant at arbitrary points (1D: shape (M,), 2D: (M, 2)).

        The Nyquist coefficient is split symmetrically, so real samples give
        a real interpolant.
        """
        c = self.frequency_view().reshape(-1)
        k1 = np.arange(-self.N // 2, self.N // 2 + 1)
        grids = np.meshgrid(*([k1] * self.d), indexing="ij")
        k = np.stack([g.reshape(-1) for g in grids], axis=-1).astype(float)
        pts = np.asarray(points, dtype=float)
        shape = pts.shape if self.d == 1 else pts.shape[:-1]
        pts = pts.reshape(-1, self.d)
        out = np.empty(len(pts), dtype=complex)
        for start in range(0, len(pts), 2048):
            chunk = pts[start:start + 2048]
            out[start:start + 2048] = np.exp(2j * np.pi * chunk @ k.T) @ c
        return out.reshape(shape)


def grid_points(N, d=1):
    x = np.arange(N) / N
    if d == 1:
        return x
    X, Y = np.meshgrid(x, x, indexing="ij")
    return np.stack([X, Y], axis=-1)


def apply_multiplier(u, a):
    """Return ``a(D) u``: multiply the coefficient of ``e_k`` by ``a(k)``.

    ``a`` is either a callable on the wavenumber array (last axis = d) or an
    array already evaluated on :meth:`GridFunction.wavenumbers`.
    """
    symbol = a(u.wavenumbers()) if callable(a) else np.asarray(a)
    return GridFunction(np.fft.ifftn(np.fft.fftn(u.values) * symbol))


def top_index(N):
    """Largest dyadic index whose block fits under the grid Nyquist band."""
    return int(math.floor(math.log2(N / 2))) - 1


def cover_index(u):
    """Smallest block count whose truncated partition of unity is 1 on every grid frequency."""
    rmax = np.sqrt(u.d) * u.N / 2
    return int(math.ceil(math.log2(rmax))) + 1


def _radii_angles(u):
    k = u.wavenumbers()
    r = np.sqrt(np.sum(k * k, axis=-1))
    theta = np.arctan2(k[..., 1], k[..., 0]) if u.d == 2 else None
    return r, theta


def block_symbol(u, n, sigma=None, cones=None, family="psi"):
    """Multiplier array for one block on the grid of ``u``.

    ``family`` selects ``psi`` (ψ_n / ψ_{n,σ}), ``tilde`` (ψ~) or ``check``
    (ψˇ_{n,σ}, built from :meth:`ConeSystem.check_cones`).
    """
    r, theta = _radii_angles(u)
    if sigma is None:
        return _psi_radial(n, r) if family != "tilde" else _psi_tilde_radial(n, r)
    if family == "tilde":
        if n == 0:
            return chi(r / 2.0)
        return _psi_tilde_radial(n, r) * cones.tilde_phi(sigma, theta)
    use = cones.check_cones() if family == "check" else cones
    if n == 0:
        return chi(r) / 2.0
    return _psi_radial(n, r) * use.phi(sigma, theta)


@dataclass
class DyadicDecomposition:
    """Blocks ``u_n`` (keys ``n``) or ``u_{n,σ}`` (keys ``(n, σ)``) of a grid function."""

    n_max: int
    blocks: dict
    cones: "ConeSystem | None" = None
    top_band_mass: float = 0.0
    meta: dict = field(default_factory=dict)

    def reconstruct(self):
        total = None
        for key in sorted(self.blocks, key=str):
            b = self.blocks[key]
            total = b if total is None else total + b
        return total

    def sup_norms(self):
        return {key: b.sup_norm() for key, b in self.blocks.items()}


def _top_band_fraction(u, n_max):
    r, _ = _radii_angles(u)
    c2 = np.abs(u.coefficients) ** 2
    total = float(np.sum(c2))
    if total == 0.0:
        return 0.0
    return float(np.sum(c2[r > 2.0**n_max]) / total)


def _warn_top_band(u, n_max):
    frac = _top_band_fraction(u, n_max)
    if frac > TOP_BAND_TOL:
        warnings.warn(
            f"{frac:.3g} of the spectral mass lies above 2**{n_max}; dyadic truncation is unreliable",
            TruncationWarning, stacklevel=3)
    return frac


def dyadic_blocks(u, cones=None, n_max=None, family="psi", warn=True):
    """Split ``u`` into dyadic blocks up to ``n_max`` (default :func:`top_index`).

    With ``cones`` the blocks are the anisotropic ``u_{n,σ}``.  Passing
    ``n_max=cover_index(u)`` gives a decomposition that reconstructs ``u``
    exactly on the grid, at the price of blocks that reach past Nyquist.
    """
    if cones is not None and u.d != 2:
        raise ConfigError("anisotropic blocks need a 2D grid function")
    if n_max is None:
        n_max = top_index(u.N)
    frac = _warn_top_band(u, n_max) if warn else _top_band_fraction(u, n_max)
    fu = np.fft.fftn(u.values)
    blocks = {}
    for n in range(n_max + 1):
        if cones is None:
            sym = block_symbol(u, n, family=family)
            blocks[n] = GridFunction(np.fft.ifftn(fu * sym))
        else:
            for sigma in ("+", "-"):
                sym = block_symbol(u, n, sigma, cones, family=family)
                blocks[(n, sigma)] = GridFunction(np.fft.ifftn(fu * sym))
    return DyadicDecomposition(n_max=n_max, blocks=blocks, cones=cones, top_band_mass=frac)


def holder_norm_star(u, p, n_max=None):
    """Dyadic Hölder norm ``sup_n 2**(p n) ||u_n||_inf`` over blocks ``n <= n_max``."""
    dec = dyadic_blocks(u, n_max=n_max)
    return max(2.0 ** (p * n) * b.sup_norm() for n, b in dec.blocks.items())


def aniso_norm(u, p, q, cones, n_max=None):
    """Anisotropic norm: max of the ``2**(p n)``-weighted + blocks and ``2**(q n)``-weighted - blocks."""
    if u.d != 2:
        raise ConfigError("the anisotropic norm is defined on 2D grids")
    dec = dyadic_blocks(u, cones=cones, n_max=n_max)
    c = {"+": p, "-": q}
    return max(2.0 ** (c[s] * n) * b.sup_norm() for (n, s), b in dec.blocks.items())


def classical_holder_norm(u, p, radius=0.25):
    """``max(sup|u|, sup |u(x) - u(y)| / |x - y|**p)`` over grid pairs at torus distance <= ``radius``."""
    if not 0 < p < 1:
        raise ConfigError(f"classical Hölder exponent must lie in (0, 1), got {p}")
    v = u.values
    N = u.N
    smax = int(math.floor(radius * N))
    best = float(np.max(np.abs(v)))
    if u.d == 1:
        for s in range(1, smax + 1):
            q = np.max(np.abs(v - np.roll(v, s))) / (s / N) ** p
            best = max(best, float(q))
        return best
    for s1 in range(0, smax + 1):
        for s2 in range(-smax, smax + 1):
            if (s1 == 0 and s2 <= 0) or s1 * s1 + s2 * s2 > smax * smax:
                continue
            dist = math.hypot(s1, s2) / N
            diff = np.abs(v - np.roll(v, (s1, s2), axis=(0, 1)))
            best = max(best, float(np.max(diff)) / dist**p)
    return best


def kernel_l1_mass(N, n, d=1):
    """ℓ¹ mass ``N**-d sum_x |K_n(x)|`` of the grid kernel whose symbol is ψ_n."""
    u = GridFunction.zeros(N, d)
    sym = block_symbol(u, n)
    kernel = np.fft.ifftn(sym) * sym.size  # K_n(x) = sum_k psi_n(k) e_k(x)
    return float(np.sum(np.abs(kernel)) / sym.size)


def band_limited_corpus(N=256, count=20, seed=0):
    """Fixed set of smooth 1D test functions for norm comparisons.

    Four families of five: single modes, lacunary cosine sums with ``2**-n``
    amplitudes, random trigonometric polynomials with ``(1 + |k|)**-1.5``
    coefficients, and periodised Gaussians.  Everything is band-limited to
    well below the top dyadic block at ``N = 256``.
    """
    N = int(N)
    rng = np.random.default_rng(seed)
    x = np.arange(N) / N
    out = [np.exp(2j * np.pi * k * x) for k in (1, 3, 8, 20, 45)]
    for _ in range(5):
        out.append(sum(2.0**-n * np.cos(2 * np.pi * 2**n * x + rng.uniform(0, 2 * np.pi))
                       for n in range(1, 7)))
    for K in (4, 8, 16, 32, 48):
        k = np.arange(-K, K + 1)
        c = (rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)) / (1 + np.abs(k)) ** 1.5
        out.append(np.exp(2j * np.pi * np.outer(x, k)) @ c)
    for w in (0.05, 0.06, 0.07, 0.08, 0.1):
        dist = (x - rng.uniform() + 0.5) % 1 - 0.5
        out.append(np.exp(-0.5 * (dist / w) ** 2))
    return [GridFunction(v) for v in out[:count]]
