"""Direct computation of the oscillatory kernels V_n^l and their decay checks.

The kernel of one block pair is

    V(x, y) = int e^{i(x-w)xi + i(T(w)-T(y))eta} gamma(w) psi_n(xi) psi~_l(eta) dw dxi deta

on the real line (``d = 1``) or the plane (``d = 2``, small indices).  The
triple integral is a tensor-product trapezoid sum; the sums are evaluated in
factorised order (``eta`` first, then ``w`` by FFT, then ``xi``), which is the
same finite sum.  Frequencies are angular, matching ``e^{i x xi}``.
"""
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import ConfigError, ConvergenceError, NumericalError, check_int, check_real
from .fourier_dyadic import ConeSystem, _angle, _psi_radial, _psi_tilde_radial, chi
from .transfer_op import LinkageRelation, support_distance

__all__ = [
    "Amplitude",
    "EnvelopeProfile",
    "KernelSample",
    "KernelBoundReport",
    "kernel_sample",
    "kernel_V",
    "kernel_bound_check",
    "window_kernel",
    "IBPResult",
    "plain_ibp_factor",
    "RegularizedIBPResult",
    "regularized_ibp",
    "mollification_scan",
    "mollifier",
    "appendix_phase_split",
    "SeparationResult",
    "support_separation",
    "scaling_identity",
]

TAIL_TOL = 1e-9
TAIL_TOL_2D = 1e-6
BUDGET_2D = 4e9


# amplitudes -------------------------------------------------------------------

def _exp_bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = np.abs(t) < 1.0
    out[m] = np.exp(1.0 - 1.0 / (1.0 - t[m] ** 2))
    return out


def _bspline(t, order):
    """Cardinal B-spline of ``order`` (degree ``order - 1``) rescaled to ``[-1, 1]``, peak-normalised."""
    from scipy.interpolate import BSpline

    knots = np.linspace(-1.0, 1.0, order + 1)
    b = BSpline.basis_element(knots, extrapolate=False)
    t = np.asarray(t, dtype=float)
    out = np.nan_to_num(b(t), nan=0.0)
    return out / float(b(0.0))


@dataclass(frozen=True)
class Amplitude:
    """Compactly supported amplitude ``gamma`` on R or R^2 (tensor product).

    ``kind`` is ``bump`` (C^inf exp profile), ``bspline`` (piecewise
    polynomial of degree ``order - 1``, hence C^{order-2,1}), ``constant``
    (not compactly supported; used on the periodic box only) or ``zero``.
    """

    kind: str = "bump"
    center: float = 0.0
    radius: float = 0.5
    order: int = 4
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("bump", "bspline", "constant", "zero"):
            raise ConfigError(f"unknown amplitude kind {self.kind!r}")
        if self.radius <= 0:
            raise ConfigError("amplitude radius must be positive")
        if self.kind == "bspline" and self.order < 2:
            raise ConfigError("bspline order must be >= 2")

    @property
    def compact(self):
        return self.kind in ("bump", "bspline")

    @property
    def is_zero(self):
        return self.kind == "zero" or self.value == 0

    def support(self):
        return (self.center - self.radius, self.center + self.radius)

    def _profile(self, w):
        t = (np.asarray(w, dtype=float) - self.center) / self.radius
        if self.kind == "bump":
            return _exp_bump(t)
        return _bspline(t, self.order)

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        if self.kind == "zero":
            return np.zeros(w.shape[:-1] if w.ndim > 1 and w.shape[-1] == 2 else w.shape)
        if self.kind == "constant":
            shape = w.shape[:-1] if w.ndim > 1 and w.shape[-1] == 2 else w.shape
            return np.full(shape, float(self.value))
        if w.ndim > 1 and w.shape[-1] == 2:
            return self.value * self._profile(w[..., 0]) * self._profile(w[..., 1])
        return self.value * self._profile(w)

    def sup(self):
        return 0.0 if self.is_zero else abs(self.value)

    def to_dict(self):
        return {"kind": self.kind, "center": self.center, "radius": self.radius,
                "order": self.order, "value": self.value}


# envelope ---------------------------------------------------------------------

@dataclass(frozen=True)
class EnvelopeProfile:
    """Comparison function ``b`` and the kernel normalisation.

    ``b(x) = 1`` for ``|x| <= 1`` and ``|x|^{-d-1}`` otherwise.  ``kind``
    ``"kernel"`` uses ``2^{-(r-1) max} 2^{d min} b(2^min (x-y))``;
    ``"appendix"`` uses ``2^{-r max} 2^{(d+1) min} b(2^min (x-y))``.
    """

    d: int = 1
    kind: str = "kernel"

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ConfigError("envelope dimension must be 1 or 2")
        if self.kind not in ("kernel", "appendix"):
            raise ConfigError(f"unknown envelope kind {self.kind!r}")

    def b(self, x):
        x = np.asarray(x, dtype=float)
        r = np.abs(x) if self.d == 1 or x.ndim == 0 or x.shape[-1] != 2 else np.linalg.norm(x, axis=-1)
        return np.where(r <= 1.0, 1.0, np.maximum(r, 1.0) ** (-self.d - 1.0))

    def b_integral(self):
        """``int b``: ``4`` on R, ``3 pi`` on R^2."""
        return 4.0 if self.d == 1 else 3.0 * math.pi

    def value(self, n, ell, r, diff):
        hi, lo = max(n, ell), min(n, ell)
        if self.kind == "kernel":
            scale = 2.0 ** (-(r - 1) * hi + self.d * lo)
        else:
            scale = 2.0 ** (-r * hi + (self.d + 1) * lo)
        return scale * self.b(2.0**lo * np.asarray(diff, dtype=float))


# window kernels -----------------------------------------------------------------

def _radial(family, index, r):
    return _psi_radial(index, r) if family == "psi" else _psi_tilde_radial(index, r)


def _window_outer(family, index):
    if family == "psi":
        return 2.0 if index == 0 else 2.0 ** (index + 1)
    return 4.0 if index == 0 else 2.0 ** (index + 2)


def window_kernel(family, index, u, n_xi=1 << 15):
    """``int e^{i u xi} m(|xi|) dxi`` on R for ``m = psi_n`` or ``psi~_l`` (real, even).

    Fine trapezoid rule; the multiplier is smooth with compact support, so
    the rule is spectrally accurate for moderate ``u``.
    """
    top = _window_outer(family, index)
    xi = np.linspace(0.0, top, n_xi + 1)
    h = xi[1] - xi[0]
    wts = _radial(family, index, xi) * h
    wts[0] *= 0.5
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty(u.shape)
    for s in range(0, u.size, 256):
        out.flat[s:s + 256] = 2.0 * np.cos(np.outer(u.ravel()[s:s + 256], xi)) @ wts
    return out


@functools.lru_cache(maxsize=None)
def _tail_length(family, index, tol=TAIL_TOL):
    """Smallest ``u`` beyond which ``|K(u)| < tol * K(0)`` (measured once per window)."""
    if index >= 2:
        # psi_n(r) = psi_1(r / 2^{n-1}) and likewise for psi~, so tails scale by 2^{1-n}
        return _tail_length(family, 1, tol) / 2.0 ** (index - 1)
    u = np.arange(0.0, 2048.0, 0.25)
    K = np.abs(window_kernel(family, index, u))
    big = np.nonzero(K > tol * K[0])[0]
    return float(u[big[-1]] + 0.25)


def _box(span, family, index, resolution_floor, tol=TAIL_TOL):
    """Box side: kernel tails below ``tol`` beyond the span, and enough frequency points."""
    side = 2.0 * (span + _tail_length(family, index, tol))
    side = max(side, resolution_floor)
    return 2.0 ** math.ceil(math.log2(side))


# kernel -------------------------------------------------------------------------

@dataclass
class KernelSample:
    """Kernel values of one block pair on an ``(x, y)`` grid."""

    n: int
    ell: int
    sigma: str
    tau: str
    x: np.ndarray
    y: np.ndarray
    V: np.ndarray
    quad_error: float
    noise_floor: float
    meta: dict = field(default_factory=dict)

    @property
    def sup_abs(self):
        return float(np.max(np.abs(self.V))) if self.V.size else 0.0

    def envelope(self, profile, r):
        diff = self.x[:, None] - self.y[None, :] if self.x.ndim == 1 else \
            self.x[:, None, :] - self.y[None, :, :]
        return profile.value(self.n, self.ell, r, diff)

    def constant(self, profile, r):
        """``max |V| / envelope`` over the grid (the fitted constant ``C(n, l)``)."""
        env = self.envelope(profile, r)
        if np.any(env <= 0):
            raise NumericalError("envelope must be strictly positive")
        return float(np.max(np.abs(self.V) / env))


def _branch_eval(branch, w):
    # local chart: toral maps are used through their linear lift (no mod 1 jump)
    lift = getattr(branch, "_lift", None)
    f = lift if lift is not None else branch.evaluate
    return np.asarray(f(np.asarray(w, dtype=float)), dtype=float)


def _ktilde_matrix(ell, a, b, L_eta, tau=None, cones=None):
    """``K~(a_i - b_j)`` for all pairs by the eta trapezoid sum (matrix products)."""
    h = 2.0 * math.pi / L_eta
    top = _window_outer("tilde", ell)
    if a.ndim == 1:
        eta = h * np.arange(0, int(top / h) + 2)
        wts = _psi_tilde_radial(ell, eta) * h
        wts[1:] *= 2.0  # even symmetry folds negative eta
        ca, sa = np.cos(np.outer(a, eta)), np.sin(np.outer(a, eta))
        cb, sb = np.cos(np.outer(b, eta)), np.sin(np.outer(b, eta))
        return (ca * wts) @ cb.T + (sa * wts) @ sb.T
    m = int(top / h) + 2
    g = h * np.arange(-m, m + 1)
    E1, E2 = np.meshgrid(g, g, indexing="ij")
    eta = np.stack([E1.ravel(), E2.ravel()], axis=-1)
    r = np.linalg.norm(eta, axis=1)
    if tau is None or ell == 0:
        wts = _psi_tilde_radial(ell, r) if ell > 0 else chi(r / 2.0)
    else:
        wts = _psi_tilde_radial(ell, r) * cones.tilde_phi(tau, _angle(eta))
    keep = wts != 0
    eta, wts = eta[keep], wts[keep] * h * h
    out = np.zeros((a.shape[0], b.shape[0]), dtype=complex)
    for s in range(0, eta.shape[0], 4096):
        e = eta[s:s + 4096]
        out += (np.exp(1j * a @ e.T) * wts[s:s + 4096]) @ np.exp(-1j * b @ e.T).T
    return out


def _psi_weights(n, xi, sigma, cones):
    if xi.ndim == 1:
        return _psi_radial(n, np.abs(xi))
    r = np.linalg.norm(xi, axis=-1)
    if sigma is None:
        return _psi_radial(n, r)
    check = cones.check_cones()
    if n == 0:
        return chi(r) / 2.0
    return _psi_radial(n, r) * check.phi(sigma, _angle(xi))


def _kernel_once(branch, gamma, n, ell, x, y, sigma, tau, cones, resolution, L_xi, L_eta, d):
    """One trapezoid evaluation at w-step ``1 / (resolution 2^max)``."""
    hi = max(n, ell)
    h = 1.0 / (resolution * 2.0**hi)
    lo_w, hi_w = gamma.support() if gamma.compact else (-L_xi / 2, L_xi / 2)
    N = int(round(L_xi / h))
    j0 = int(math.floor((lo_w + L_xi / 2) / h))
    j1 = int(math.ceil((hi_w + L_xi / 2) / h))
    j0, j1 = max(j0, 0), min(j1, N - 1)
    w1 = -L_xi / 2 + h * np.arange(j0, j1 + 1)
    if d == 1:
        w = w1
        gw = gamma(w)
        live = gw != 0
        Kt = _ktilde_matrix(ell, _branch_eval(branch, w[live]), _branch_eval(branch, y), L_eta)
        F = np.zeros((w.size, y.shape[0]), dtype=complex)
        F[live] = gw[live, None] * Kt
        full = np.zeros((N, y.shape[0]), dtype=complex)
        full[j0:j1 + 1] = F
        Fh = np.fft.fft(full, axis=0) * h
        m = np.fft.fftfreq(N, d=1.0 / N)
        xi = 2.0 * math.pi * m / L_xi
        wts = _psi_weights(n, xi, None, None)
        sel = wts != 0
        # shift: lattice starts at -L/2, so F^(xi) picks up exp(i xi L/2)
        G = Fh[sel] * (wts[sel] * np.exp(1j * xi[sel] * L_xi / 2))[:, None]
        E = np.exp(1j * np.outer(x, xi[sel]))
        V = (2.0 * math.pi / L_xi) * (E @ G)
        scale = float(np.sum(np.abs(gw)) * h * np.max(np.abs(Kt), initial=0.0) * np.sum(np.abs(wts)) * 2 * math.pi / L_xi)
        return V, scale
    # 2D: plain trapezoid nodes on the support square and a separable DFT onto the xi grid
    w1 = np.arange(lo_w, hi_w + h / 2, h)
    W1, W2 = np.meshgrid(w1, w1, indexing="ij")
    w = np.stack([W1.ravel(), W2.ravel()], axis=-1)
    gw = gamma(w)
    live = gw != 0
    s_eta = 2.0 * math.pi / L_eta
    work = math.pi * (_window_outer("tilde", ell) / s_eta) ** 2 * int(np.sum(live)) * y.shape[0]
    if work > BUDGET_2D:
        raise ConvergenceError(f"quadrature budget exceeded: 2D kernel needs {work:.2e} > {BUDGET_2D:.0e} operations")
    Kt = _ktilde_matrix(ell, _branch_eval(branch, w[live]), _branch_eval(branch, y), L_eta, tau, cones)
    F = np.zeros((w.shape[0], y.shape[0]), dtype=complex)
    F[live] = gw[live, None] * Kt
    s_xi = 2.0 * math.pi / L_xi
    K = int(math.ceil(_window_outer("psi", n) / s_xi))
    xi1 = s_xi * np.arange(-K, K + 1)
    X1, X2 = np.meshgrid(xi1, xi1, indexing="ij")
    xi = np.stack([X1.ravel(), X2.ravel()], axis=-1)
    wts = _psi_weights(n, xi, sigma, cones)
    sel = np.nonzero(wts)[0]
    E1 = np.exp(-1j * np.outer(xi1, w1))
    m = w1.size
    Fh = np.empty((sel.size, y.shape[0]), dtype=complex)
    for k in range(y.shape[0]):
        Fh[:, k] = (E1 @ F[:, k].reshape(m, m) @ E1.T).ravel()[sel] * h * h
    V = np.zeros((x.shape[0], y.shape[0]), dtype=complex)
    for c in range(0, sel.size, 8192):
        part = xi[sel[c:c + 8192]]
        V += np.exp(1j * x @ part.T) @ (Fh[c:c + 8192] * wts[sel[c:c + 8192], None])
    V *= s_xi * s_xi
    scale = float(np.sum(np.abs(gw)) * h * h * np.max(np.abs(Kt), initial=0.0)
                  * np.sum(np.abs(wts)) * s_xi * s_xi)
    return V, scale


def kernel_sample(branch, gamma, n, ell, x=None, y=None, sigma=None, tau=None, cones=None,
                  resolution=16, rtol=1e-6, max_points=1 << 23, n_y=33, window=(-1.0, 1.0)):
    """Kernel ``V_n^l`` (or ``V_{n,sigma}^{l,tau}`` with cones) on an ``(x, y)`` grid.

    The w-axis uses ``resolution * 2^max(n, l)`` points per unit length and
    the result is compared with the run at twice the resolution (Richardson
    comparison); the finer value is returned with the difference as
    ``quad_error``.  Refinement continues until the difference is below
    ``rtol * max|V|`` or below the rounding floor; exceeding ``max_points``
    on the FFT axis raises :class:`ConvergenceError`.
    """
    d = getattr(branch, "d", 1)
    n = check_int(n, "n", minimum=0)
    ell = check_int(ell, "ell", minimum=0)
    if max(n, ell) > 9:
        raise ConfigError("kernel indices must be <= 9")
    if d == 2 and max(n, ell) > 2:
        raise ConfigError("2D kernels are limited to indices <= 2")
    if (sigma is None) != (tau is None) or (sigma is not None and cones is None):
        raise ConfigError("anisotropic kernels need sigma, tau and a cone system")
    if sigma is not None and d != 2:
        raise ConfigError("cone labels need a 2D branch")
    resolution = check_int(resolution, "resolution", minimum=16)
    hi = max(n, ell)
    if x is None:
        if d == 1:
            step = 2.0 ** (-hi) / 4.0
            x = np.arange(window[0], window[1] + step / 2, step)
        else:
            g1 = np.linspace(window[0], window[1], 9)
            X1, X2 = np.meshgrid(g1, g1, indexing="ij")
            x = np.stack([X1.ravel(), X2.ravel()], axis=-1)
    if y is None:
        if d == 1:
            y = np.linspace(window[0], window[1], n_y)
        else:
            g1 = np.linspace(window[0], window[1], 3)
            Y1, Y2 = np.meshgrid(g1, g1, indexing="ij")
            y = np.stack([Y1.ravel(), Y2.ravel()], axis=-1)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if d == 1:
        x, y = np.atleast_1d(x).ravel(), np.atleast_1d(y).ravel()
    else:
        x, y = np.atleast_2d(x), np.atleast_2d(y)
    if gamma.is_zero:
        return KernelSample(n, ell, sigma, tau, x, y, np.zeros((x.shape[0], y.shape[0]), complex), 0.0, 0.0,
                            {"resolution": resolution})
    lo, hi_s = gamma.support() if gamma.compact else (window[0], window[1])
    span_x = float(np.max(np.abs(np.concatenate([np.ravel(x) - lo, np.ravel(x) - hi_s]))))
    if gamma.compact:
        wpts = np.linspace(lo, hi_s, 65)
        if d == 2:
            W1, W2 = np.meshgrid(wpts, wpts, indexing="ij")
            wpts = np.stack([W1.ravel(), W2.ravel()], axis=-1)
        Tw, Ty = _branch_eval(branch, wpts), _branch_eval(branch, y)
        diff = Tw[:, None] - Ty[None, :] if d == 1 else Tw[:, None, :] - Ty[None, :, :]
        span_eta = float(np.max(np.abs(diff))) + 0.5
    else:
        span_eta = 2.0 * max(abs(window[0]), abs(window[1])) + 1.0
    # eta and xi axes: >= 16 * 2^max points across the multiplier support needs L >= 8 pi
    tol = TAIL_TOL if d == 1 else TAIL_TOL_2D
    L_xi = _box(span_x, "psi", n, 8 * math.pi, tol)
    L_eta = _box(span_eta, "tilde", ell, 8 * math.pi, tol)
    if not gamma.compact:
        L_xi = L_eta = max(L_xi, L_eta)
    res = resolution
    prev = None
    while True:
        N = int(round(L_xi * res * 2.0**hi)) if d == 1 else int(round(res * 2.0**hi)) ** 2
        if N > max_points:
            raise ConvergenceError(
                f"quadrature budget exceeded for (n, l) = ({n}, {ell}): {N} > {max_points} points")
        V, scale = _kernel_once(branch, gamma, n, ell, x, y, sigma, tau, cones, res, L_xi, L_eta, d)
        floor = 1e-13 * scale
        if prev is not None:
            err = float(np.max(np.abs(V - prev)))
            if err <= max(rtol * float(np.max(np.abs(V))), floor):
                meta = {"resolution": res, "box_xi": L_xi, "box_eta": L_eta, "points": N}
                return KernelSample(n, ell, sigma, tau, x, y, V, err, floor, meta)
        prev = V
        res *= 2


def kernel_V(branch, gamma, n, ell, x, y, **quad):
    """``V_n^l(x, y)`` at given points; scalars give a complex number, arrays a grid."""
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0 and getattr(branch, "d", 1) == 1
    s = kernel_sample(branch, gamma, n, ell, x=np.atleast_1d(x), y=np.atleast_1d(y), **quad)
    return complex(s.V[0, 0]) if scalar else s.V


@dataclass
class KernelBoundReport:
    """Fitted constants ``C(n, l)`` over non-linked pairs and the decay regression."""

    constants: dict
    sup_abs: dict
    spread: float
    slope: float
    slope_window: tuple
    r_test: float
    envelope: str
    max_quad_error: float

    def rows(self):
        """CSV rows ``(n, l, sigma, tau, sup_abs_V, envelope_const, slope_window)``."""
        win = f"{self.slope_window[0]}-{self.slope_window[1]}"
        out = []
        for key in sorted(self.constants):
            n, ell, sigma, tau = key
            out.append((n, ell, sigma or "", tau or "", self.sup_abs[key], self.constants[key], win))
        return out

    def to_dict(self):
        return {"spread": self.spread, "slope": self.slope, "slope_window": list(self.slope_window),
                "r_test": self.r_test, "envelope": self.envelope, "max_quad_error": self.max_quad_error,
                "pairs": [list(r) for r in self.rows()]}


def kernel_bound_check(branch, gamma, rel, n_max=9, envelope="kernel", r_test=3.0, slope_from=4,
                       threads=None, **quad):
    """Fit ``C(n, l)`` for every non-linked pair with ``n, l <= n_max``.

    The decay slope is the least-squares slope of ``log sup|V|`` (natural
    log) against ``max(n, l)``, using for each level the largest sup over
    pairs at that level and levels ``>= slope_from``.
    """
    from ._parallel import ordered_map

    if not isinstance(rel, LinkageRelation):
        raise ConfigError("kernel_bound_check needs a LinkageRelation")
    d = getattr(branch, "d", 1)
    profile = EnvelopeProfile(d=d, kind=envelope)
    pairs = [(n, ell) for n in range(n_max + 1) for ell in range(n_max + 1) if not rel.linked(ell, n)]
    if not pairs:
        raise ConfigError("no non-linked pairs in range")
    samples = ordered_map(lambda p: kernel_sample(branch, gamma, p[0], p[1], **quad), pairs, threads)
    consts, sups = {}, {}
    for (n, ell), s in zip(pairs, samples):
        consts[(n, ell, None, None)] = s.constant(profile, r_test)
        sups[(n, ell, None, None)] = s.sup_abs
    positive = [c for c in consts.values() if c > 0]
    spread = max(positive) / min(positive) if positive else 0.0
    levels = sorted({max(n, ell) for n, ell in pairs if max(n, ell) >= slope_from})
    slope = math.nan
    if len(levels) >= 2 and all(
            max(sups[(n, ell, None, None)] for n, ell in pairs if max(n, ell) == m) > 0 for m in levels):
        top = [max(sups[(n, ell, None, None)] for n, ell in pairs if max(n, ell) == m) for m in levels]
        slope = float(np.polyfit(levels, np.log(top), 1)[0])
    elif not positive:
        slope = -math.inf
    window = (levels[0], levels[-1]) if levels else (slope_from, slope_from)
    return KernelBoundReport(consts, sups, spread, slope, window, r_test, envelope,
                             max(s.quad_error for s in samples))


# integration by parts -----------------------------------------------------------

@dataclass
class IBPResult:
    """Amplitude after repeated integration by parts and its measured sup-norm gain."""

    amplitude: object
    evaluate: object
    reps: int
    sup_before: float
    sup_after: float

    @property
    def gain(self):
        return 0.0 if self.sup_before == 0 else self.sup_after / self.sup_before


def plain_ibp_factor(f, g, reps=1, symbol="w", params=None, w_grid=None):
    """Apply ``int e^{if} g = i int e^{if} d/dw (f' g / f'^2)`` ``reps`` times (1D).

    ``f`` and ``g`` are sympy expressions (or strings) in ``symbol``; other
    free symbols are parameters sampled on the grids in ``params``.  The
    sup norms are taken over ``w_grid`` and all parameter combinations.
    """
    import sympy as sp

    reps = check_int(reps, "reps", minimum=0)
    w = sp.Symbol(symbol, real=True)
    f = sp.sympify(f, locals={symbol: w})
    g = sp.sympify(g, locals={symbol: w})
    params = dict(params or {})
    syms = [w] + [sp.Symbol(k, real=True) for k in params]
    f = f.subs({sp.Symbol(k): s for k, s in zip(params, syms[1:])})
    g = g.subs({sp.Symbol(k): s for k, s in zip(params, syms[1:])})
    amp = g
    if g != 0:
        df = sp.diff(f, w)
        for _ in range(reps):
            amp = sp.I * sp.diff(amp / df, w)
    w_grid = np.linspace(-0.5, 0.5, 401)[1:-1] if w_grid is None else np.asarray(w_grid, float)
    mesh = np.meshgrid(w_grid, *[np.asarray(v, float) for v in params.values()], indexing="ij")
    with np.errstate(all="ignore"):
        if params:
            df_num = sp.lambdify(syms, sp.diff(f, w), "numpy")
            grad = np.abs(np.broadcast_to(df_num(*mesh), mesh[0].shape))
            g_num = sp.lambdify(syms, g, "numpy")
            gv = np.abs(np.broadcast_to(g_num(*mesh), mesh[0].shape))
            if np.any((grad < 1e-12) & (gv > 0)):
                raise ConfigError("phase gradient vanishes on the support of the amplitude")
        func = sp.lambdify(syms, amp, "numpy")
        g_func = sp.lambdify(syms, g, "numpy")
        after = np.abs(np.broadcast_to(np.asarray(func(*mesh), dtype=complex), mesh[0].shape))
        before = np.abs(np.broadcast_to(np.asarray(g_func(*mesh), dtype=complex), mesh[0].shape))
    return IBPResult(amp, func, reps, float(np.max(before)), float(np.max(after)))


def mollifier(s):
    """Standard exp-profile bump on ``[-1, 1]`` with unit mass."""
    return _exp_bump(s) / _MOLLIFIER_MASS


def _mollifier_derivative(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    m = np.abs(s) < 1.0
    t = s[m]
    out[m] = np.exp(1.0 - 1.0 / (1.0 - t * t)) * (-2.0 * t / (1.0 - t * t) ** 2)
    return out / _MOLLIFIER_MASS


def _gl_panels(breaks, order=20):
    """Composite Gauss-Legendre nodes/weights on consecutive ``breaks``."""
    xg, wg = np.polynomial.legendre.leggauss(order)
    a, b = np.asarray(breaks[:-1]), np.asarray(breaks[1:])
    nodes = (0.5 * (b - a))[:, None] * xg[None, :] + (0.5 * (a + b))[:, None]
    weights = (0.5 * (b - a))[:, None] * wg[None, :]
    return nodes.ravel(), weights.ravel()


_MOLLIFIER_MASS = float(np.sum(_exp_bump(_gl_panels(np.linspace(-1, 1, 41), 30)[0])
                               * _gl_panels(np.linspace(-1, 1, 41), 30)[1]))


def _graded_breaks(a, b, singular, max_width, levels=24, ratio=0.25):
    """Breakpoints on ``[a, b]`` refined geometrically toward the ``singular`` points."""
    pts = {a, b}
    for c in singular:
        if a < c < b:
            pts.add(c)
            for k in range(1, levels + 1):
                off = ratio**k
                for p in (c - off, c + off):
                    if a < p < b:
                        pts.add(p)
    pts = np.array(sorted(pts))
    out = [pts[0]]
    for lo, hi in zip(pts[:-1], pts[1:]):
        m = max(1, int(math.ceil((hi - lo) / max_width)))
        out.extend(np.linspace(lo, hi, m + 1)[1:])
    return np.array(out)


@dataclass
class RegularizedIBPResult:
    lhs: complex
    rhs: complex
    residual: float
    h_holder: float
    mollification_error: float
    derivative_sup: float
    eps: float
    Lam: float

    def constants(self, delta):
        """Implied constants ``C`` in both mollification bounds."""
        if self.h_holder == 0:
            return 0.0, 0.0
        return (self.derivative_sup / (self.h_holder * self.eps ** (delta - 1.0)),
                self.mollification_error / (self.h_holder * self.eps**delta))


def _holder_seminorm(x, v, delta):
    best = 0.0
    for s in range(0, x.size, 512):
        dx = np.abs(x[s:s + 512, None] - x[None, :])
        dv = np.abs(v[s:s + 512, None] - v[None, :])
        ok = dx > 0
        if np.any(ok):
            best = max(best, float(np.max(dv[ok] / dx[ok] ** delta)))
    return best


def regularized_ibp(f, df, g, Lam, eps, support, singular=(), delta=0.5, order=20):
    """Both sides of the regularised integration-by-parts identity in 1D.

    ``h = i f' g / f'^2``, ``h_eps = h * mollifier_eps``, and

        lhs = int e^{i Lam f} g,
        rhs = Lam^{-1} int e^{i Lam f} h_eps' - int i f' e^{i Lam f} (h - h_eps).

    All integrals use composite Gauss-Legendre panels refined toward the
    ``singular`` points of ``g`` and ``f'``; the mollifier convolutions use the
    same construction in the convolution variable.  Also returns the sup
    norms of ``h - h_eps`` and ``h_eps'`` and an estimate of ``||h||_{C^delta}``.
    """
    Lam = check_real(Lam, "Lam", minimum=1.0)
    eps = check_real(eps, "eps", minimum=0.0, strict=True)
    a, b = float(support[0]), float(support[1])
    probe = np.linspace(a, b, 4001)
    gp = np.abs(np.asarray(g(probe), dtype=float))
    if np.all(gp == 0):
        return RegularizedIBPResult(0j, 0j, 0.0, 0.0, 0.0, 0.0, eps, Lam)
    if np.min(np.abs(df(probe[gp > 0]))) < 1e-12:
        raise ConfigError("phase gradient vanishes on supp(g)")

    def h(w):
        w = np.asarray(w, dtype=float)
        out = np.zeros(w.shape, dtype=complex)
        m = (w > a) & (w < b)
        out[m] = 1j * g(w[m]) / df(w[m])
        return out

    sing = list(singular)
    width = min(eps / 4.0, math.pi / Lam / 2.0, (b - a) / 8.0)
    wb = _graded_breaks(a - eps, b + eps, sing + [a, b], width)
    w, wt = _gl_panels(wb, order)

    cuts = np.asarray(sing + [a, b], dtype=float)
    xg, wg = np.polynomial.legendre.leggauss(order)
    q = 0.25 ** np.arange(1, 25)

    def conv(wpts, kernel):
        # h(x - eps s) is singular where s = (x - c) / eps; every row gets the same
        # number of panels, graded toward each such point (clipped to [-1, 1])
        wpts = np.asarray(wpts, dtype=float)
        star = np.clip((wpts[:, None] - cuts[None, :]) / eps, -1.0, 1.0)
        pieces = [np.broadcast_to(np.linspace(-1.0, 1.0, 9), (wpts.size, 9))]
        for j in range(cuts.size):
            c = star[:, j:j + 1]
            pieces += [c, c - (c + 1.0) * q, c + (1.0 - c) * q]
        br = np.sort(np.concatenate(pieces, axis=1), axis=1)
        lo, hi = br[:, :-1], br[:, 1:]
        half = 0.5 * (hi - lo)
        sn = (half[..., None] * xg + (0.5 * (lo + hi))[..., None]).reshape(wpts.size, -1)
        sw = (half[..., None] * wg).reshape(wpts.size, -1)
        out = np.empty(wpts.size, dtype=complex)
        for k in range(0, wpts.size, 256):
            sl = slice(k, k + 256)
            out[sl] = np.sum(h(wpts[sl, None] - eps * sn[sl]) * kernel(sn[sl]) * sw[sl], axis=1)
        return out

    h_eps = conv(w, mollifier)
    dh_eps = conv(w, _mollifier_derivative) / eps
    ph = np.exp(1j * Lam * f(w))
    lhs = complex(np.sum(ph * g(w) * wt * ((w > a) & (w < b))))
    rhs = complex(np.sum(ph * dh_eps * wt) / Lam - np.sum(1j * df(w) * ph * (h(w) - h_eps) * wt))
    grid = np.unique(np.concatenate([np.linspace(a - eps, b + eps, 801), np.asarray(sing, float)]))
    h_grid = h(grid)
    moll_err = float(np.max(np.abs(h_grid - conv(grid, mollifier))))
    d_sup = float(np.max(np.abs(conv(grid, _mollifier_derivative) / eps)))
    holder = float(np.max(np.abs(h_grid))) + _holder_seminorm(grid, h_grid, delta)
    return RegularizedIBPResult(lhs, rhs, abs(lhs - rhs), holder, moll_err, d_sup, eps, Lam)


def mollification_scan(f, df, g, support, eps_list=(0.25, 1 / 16, 1 / 64), singular=(), delta=0.5,
                       Lam=None):
    """Log-log slopes of ``||h - h_eps||`` and ``||h_eps'||`` against ``eps``.

    Returns ``(results, slope_error, slope_derivative)``; the bounds predict
    ``delta`` and ``delta - 1``.
    """
    results = [regularized_ibp(f, df, g, Lam or 1.0 / e, e, support, singular, delta) for e in eps_list]
    le = np.log(np.asarray(eps_list, dtype=float))
    err = np.array([r.mollification_error for r in results])
    der = np.array([r.derivative_sup for r in results])
    if np.any(err <= 0) or np.any(der <= 0):
        raise NumericalError("mollification norms vanish; regression undefined")
    return results, float(np.polyfit(le, np.log(err), 1)[0]), float(np.polyfit(le, np.log(der), 1)[0])


# phase split and support geometry --------------------------------------------------

class appendix_phase_split:
    """``A_y(w) = T(w) - T(y) - DT(y)(w - y)``, the remainder of the linearised branch."""

    def __init__(self, branch, y):
        self.branch = branch
        self.y = np.asarray(y, dtype=float)
        self.Ty = _branch_eval(branch, self.y)
        self.DTy = np.asarray(branch.derivative(self.y), dtype=float)

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        if self.y.ndim == 0:
            return _branch_eval(self.branch, w) - self.Ty - self.DTy * (w - self.y)
        return _branch_eval(self.branch, w) - self.Ty - (w - self.y) @ self.DTy.T

    def derivative(self, w):
        w = np.asarray(w, dtype=float)
        return np.asarray(self.branch.derivative(w), dtype=float) - self.DTy


@dataclass
class SeparationResult:
    distance: float
    threshold: float
    N: int
    x: object
    ok: bool


def support_separation(branch, rel, ell, n, cones=None, tau=None, sigma=None, N=None, n_points=64):
    """Measured support distance of a non-linked pair against ``2^{max(n, l) - N(T)}``.

    ``N`` defaults to ``rel.threshold`` over pairs up to ``max(n, l)``
    restricted to the same labels.  A violation is reported through
    ``ok=False`` with the minimising point ``x``, never corrected.
    """
    if rel.linked(ell, n, tau, sigma):
        raise ConfigError(f"pair (l={ell}, n={n}) is linked; separation is only claimed for non-linked pairs")
    if N is None:
        N, _, _ = rel.threshold(branch, max(n, ell), cones, n_points=n_points)
    dist, x = support_distance(branch, ell, n, tau, sigma, cones, n_points=n_points)
    thr = 2.0 ** (max(n, ell) - N)
    return SeparationResult(float(dist), thr, int(N), x, bool(dist >= thr))


def scaling_identity(branch, gamma_expr, n, ell, u, v, w, symbol="w", n_grid=257):
    """Check ``(F G)(u, v, w) = 2^{n + l} W(2^n u, 2^l v, w)`` in 1D.

    ``G(xi, eta, w) = F(xi, eta, w) psi_n(xi) psi~_l(eta)`` with ``F`` the
    one-step integration-by-parts amplitude of the kernel phase
    ``-w xi + T(w) eta``; both sides are computed by separate trapezoid
    rules (the right one on the rescaled frequency grid).  Returns
    ``(lhs, rhs, relative residual)``.
    """
    import sympy as sp

    # the amplitude has a pole where xi = T'(w) eta; the windows must keep it out
    xi_min = 0.0 if n == 0 else 2.0 ** (n - 1)
    if xi_min <= abs(float(branch.derivative(w))) * _window_outer("tilde", ell):
        raise ConfigError(f"phase gradient vanishes on the (n, l) = ({n}, {ell}) windows; use a non-linked pair")
    ws, xs, es = sp.symbols(f"{symbol} xi eta", real=True)
    T = branch.symbolic(ws)
    res = plain_ibp_factor(-ws * xs + T * es, sp.sympify(gamma_expr, locals={symbol: ws}), 1, symbol,
                           params={"xi": [1.0], "eta": [1.0]})
    Ffun = res.evaluate

    def side(scale_n, scale_l, uu, vv, pref, m):
        a_xi = np.linspace(-_window_outer("psi", n), _window_outer("psi", n), m) / scale_n
        a_eta = np.linspace(-_window_outer("tilde", ell), _window_outer("tilde", ell), m) / scale_l
        XI, ETA = np.meshgrid(a_xi, a_eta, indexing="ij")
        mult = _psi_radial(n, np.abs(XI * scale_n)) * _psi_tilde_radial(ell, np.abs(ETA * scale_l))
        G = np.zeros(XI.shape, dtype=complex)
        on = mult != 0
        with np.errstate(all="ignore"):
            G[on] = np.broadcast_to(np.asarray(Ffun(w, XI[on] * scale_n, ETA[on] * scale_l), dtype=complex),
                                    XI[on].shape) * mult[on]
        ph = np.exp(1j * (uu * XI + vv * ETA))
        hx, he = a_xi[1] - a_xi[0], a_eta[1] - a_eta[0]
        return pref * (2 * math.pi) ** (-2) * np.sum(ph * G) * hx * he

    # different node counts, so the two sides are separate quadratures
    lhs = side(1.0, 1.0, u, v, 1.0, n_grid)
    rhs = 2.0 ** (n + ell) * side(2.0**n, 2.0**ell, 2.0**n * u, 2.0**ell * v, 1.0, 3 * n_grid // 2 + 1)
    return complex(lhs), complex(rhs), abs(lhs - rhs) / max(abs(lhs), 1e-300)
