"""Closed-form dynamical systems, weights and hyperbolicity diagnostics.

Three global families are supported: expanding circle maps
``T(x) = k x + eps sin(2 pi x) mod 1``, hyperbolic toral automorphisms
``T(x) = A x mod 1`` and their perturbations
``T(x) = A x + delta/(2 pi) (sin 2 pi x_1, sin 2 pi x_2) mod 1``.
Local maps used by the splitting and kernel experiments are
:class:`LocalBranch` (1D) and :class:`LinearLocalMap` (2D, constant Jacobian).
"""
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import ConfigError, ConvergenceError, check_int, check_integer_matrix, check_real
from .fourier_dyadic import ConeSystem, _angdist

__all__ = [
    "ExpandingCircleMap",
    "LinearToralMap",
    "PerturbedToralMap",
    "LocalBranch",
    "LinearLocalMap",
    "Weight",
    "map_from_spec",
    "weight_from_spec",
    "birkhoff_weight",
    "hyperbolicity_exponents",
    "lambda_pqm",
    "hyperbolicity_rates",
    "invariant_directions",
    "weakest_contraction",
    "weakest_expansion",
    "cone_hyperbolicity_check",
    "CAT_MATRIX",
    "CAT_LAMBDA",
]

CAT_MATRIX = ((2, 1), (1, 1))
CAT_LAMBDA = (3.0 + math.sqrt(5.0)) / 2.0
TWO_PI = 2.0 * np.pi


class ExpandingCircleMap:
    """``T(x) = k x + eps sin(2 pi x) mod 1`` with ``k - 2 pi |eps| > 1``."""

    kind = "expanding-circle"
    d = 1

    def __init__(self, k=2, eps=0.0, r=math.inf):
        self.k = check_int(k, "degree k", minimum=2)
        self.eps = check_real(eps, "eps")
        self.r = float(r)
        if self.min_expansion <= 1.0:
            raise ConfigError(
                f"expansion condition violated: k - 2*pi*|eps| = {self.min_expansion:.6g} must exceed 1")

    @property
    def min_expansion(self):
        return self.k - TWO_PI * abs(self.eps)

    @property
    def lambda_s(self):
        """Contraction rate of the inverse branches (valid with constant 1)."""
        return 1.0 / self.min_expansion

    def lift(self, x):
        x = np.asarray(x, dtype=float)
        return self.k * x + self.eps * np.sin(TWO_PI * x)

    def evaluate(self, x):
        return np.mod(self.lift(x), 1.0)

    def derivative(self, x):
        return self.k + TWO_PI * self.eps * np.cos(TWO_PI * np.asarray(x, dtype=float))

    def second_derivative(self, x):
        return -TWO_PI**2 * self.eps * np.sin(TWO_PI * np.asarray(x, dtype=float))

    def iterate(self, x, m):
        m = check_int(m, "m", minimum=0)
        for _ in range(m):
            x = self.evaluate(x)
        return x

    def inverse_branch(self, j, x, tol=1e-15, max_iter=60):
        """Preimage of ``x`` on branch ``j``: the y in [0, 1) with lift(y) = x + j."""
        target = np.asarray(x, dtype=float) + np.asarray(j, dtype=float)
        y = target / self.k
        for _ in range(max_iter):
            step = (self.lift(y) - target) / self.derivative(y)
            y = y - step
            if np.all(np.abs(step) <= tol):
                break
        else:
            raise ConvergenceError("inverse branch Newton iteration did not converge")
        return y

    def inverse_branches(self, x, m):
        """All ``k**m`` points ``y`` with ``T^m(y) = x`` and their itineraries.

        Returns ``(points, itineraries)``; row ``i`` of ``itineraries`` lists
        the branch used at each step, so ``T^s(points[i])`` lies in branch
        ``itineraries[i, s]``.
        """
        m = check_int(m, "m", minimum=1)
        its = _all_itineraries(self.k, m)
        y = np.full(len(its), float(x) % 1.0)
        for s in range(m - 1, -1, -1):
            y = self.inverse_branch(its[:, s], y)
        return y, its

    def to_dict(self):
        return {"kind": self.kind, "k": self.k, "eps": self.eps, "r": _r_out(self.r)}


def _r_out(r):
    return "inf" if math.isinf(r) else r


def _all_itineraries(k, m):
    idx = np.arange(k**m)
    digits = np.empty((k**m, m), dtype=np.int64)
    for s in range(m - 1, -1, -1):
        digits[:, s] = idx % k
        idx = idx // k
    return digits


class LinearToralMap:
    """Hyperbolic toral automorphism ``x -> A x mod 1``."""

    kind = "linear-toral"
    d = 2

    def __init__(self, matrix=CAT_MATRIX, r=math.inf):
        A = check_integer_matrix(matrix)
        det = int(round(np.linalg.det(A)))
        if abs(det) != 1:
            raise ConfigError(f"toral matrix must have |det| = 1, got det = {det}")
        if abs(int(np.trace(A))) <= 2:
            raise ConfigError("toral matrix must satisfy |trace| > 2 (hyperbolicity)")
        self.A = A
        self.r = float(r)
        self._eig()

    def _eig(self):
        vals, vecs = np.linalg.eig(self.A.astype(float))
        order = np.argsort(np.abs(vals))
        self.lam = float(abs(vals[order[-1]]))
        self.E_s = _unit(np.real(vecs[:, order[0]]))
        self.E_u = _unit(np.real(vecs[:, order[-1]]))
        self.stable_eigenvalue = float(np.real(vals[order[0]]))
        self.unstable_eigenvalue = float(np.real(vals[order[-1]]))

    @property
    def lambda_s(self):
        return 1.0 / self.lam

    @property
    def nu_u(self):
        return self.lam

    def evaluate(self, x):
        return np.mod(self._lift(np.asarray(x, dtype=float)), 1.0)

    def _lift(self, x):
        return x @ self.A.T.astype(float)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.A.astype(float), x.shape[:-1] + (2, 2)).copy()

    def iterate(self, x, m):
        m = check_int(m, "m", minimum=0)
        for _ in range(m):
            x = self.evaluate(x)
        return x

    def inverse(self, x):
        Ainv = np.round(np.linalg.inv(self.A)).astype(float)
        return np.mod(np.asarray(x, dtype=float) @ Ainv.T, 1.0)

    def adapted_cones(self, narrow=math.radians(8.0), wide=math.radians(80.0)):
        """Two-pair cone system about the eigen-covectors of ``A.T``.

        Θ_+ (narrow) and Θ'_+ (wide) surround the contracting covector,
        Θ_- (wide) and Θ'_- (narrow) the expanding one.
        """
        return ConeSystem.adapted(self.A, narrow, wide, prime_halfwidths=(wide, narrow))

    def to_dict(self):
        return {"kind": self.kind, "matrix": self.A.tolist(), "r": _r_out(self.r)}


def _unit(v):
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    return v if v[0] > 0 or (v[0] == 0 and v[1] > 0) else -v


class PerturbedToralMap(LinearToralMap):
    """``x -> A x + delta/(2 pi) (sin 2 pi x_1, sin 2 pi x_2) mod 1``."""

    kind = "perturbed-toral"

    def __init__(self, matrix=CAT_MATRIX, delta=0.01, r=math.inf, cones=None):
        super().__init__(matrix, r)
        self.delta = check_real(delta, "delta")
        if abs(self.delta) >= 0.5 * (self.lam - 1.0) / self.lam:
            raise ConfigError(f"perturbation delta={self.delta} too large for a certified cone system")
        self.cones = cones if cones is not None else self.adapted_cones()
        ok, witness = cone_hyperbolicity_check(self, self.cones, two_pair=self.cones.prime is not None,
                                               n_points=16, n_angles=360)
        if not ok:
            raise ConfigError(f"cone-hyperbolicity fails for the supplied cones at {witness}")

    def _lift(self, x):
        return x @ self.A.T.astype(float) + self.delta / TWO_PI * np.sin(TWO_PI * x)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        J = np.broadcast_to(self.A.astype(float), x.shape[:-1] + (2, 2)).copy()
        c = np.cos(TWO_PI * x)
        J[..., 0, 0] += self.delta * c[..., 0]
        J[..., 1, 1] += self.delta * c[..., 1]
        return J

    def inverse(self, x, tol=1e-14, max_iter=50):
        x = np.asarray(x, dtype=float)
        Ainv = np.linalg.inv(self.A.astype(float))
        y = x @ Ainv.T
        for _ in range(max_iter):
            r = self._lift(y) - x
            r -= np.round(r)
            step = np.linalg.solve(self.derivative(y), r[..., None])[..., 0]
            y = y - step
            if np.max(np.abs(step)) <= tol:
                break
        else:
            raise ConvergenceError("pre-orbit construction failed: inverse Newton did not converge")
        return np.mod(y, 1.0)

    def to_dict(self):
        d = super().to_dict()
        d["delta"] = self.delta
        return d


class LocalBranch:
    """Local 1D map ``w -> c w + a sin(2 pi w)`` (a contracting branch for ``|c| + 2 pi |a| < 1``)."""

    kind = "local-branch"
    d = 1

    def __init__(self, slope=0.5, amplitude=0.0):
        self.slope = check_real(slope, "slope")
        self.amplitude = check_real(amplitude, "amplitude")
        if abs(self.slope) <= TWO_PI * abs(self.amplitude):
            raise ConfigError("local branch must be a diffeomorphism: |slope| > 2 pi |amplitude|")

    def evaluate(self, w):
        w = np.asarray(w, dtype=float)
        return self.slope * w + self.amplitude * np.sin(TWO_PI * w)

    __call__ = evaluate

    def derivative(self, w):
        return self.slope + TWO_PI * self.amplitude * np.cos(TWO_PI * np.asarray(w, dtype=float))

    def second_derivative(self, w):
        return -TWO_PI**2 * self.amplitude * np.sin(TWO_PI * np.asarray(w, dtype=float))

    def symbolic(self, w):
        """The branch as a sympy expression in the symbol ``w``."""
        import sympy as sp

        return sp.nsimplify(self.slope) * w + sp.nsimplify(self.amplitude) * sp.sin(2 * sp.pi * w)

    @property
    def is_linear(self):
        return self.amplitude == 0.0

    def to_dict(self):
        return {"kind": self.kind, "slope": self.slope, "amplitude": self.amplitude}


class LinearLocalMap:
    """Local 2D map with constant invertible Jacobian (e.g. the identity)."""

    kind = "linear-local"
    d = 2

    def __init__(self, matrix=((1.0, 0.0), (0.0, 1.0))):
        self.A = np.asarray(matrix, dtype=float)
        if self.A.shape != (2, 2) or abs(np.linalg.det(self.A)) < 1e-14:
            raise ConfigError("linear local map needs an invertible 2x2 matrix")

    def evaluate(self, x):
        return np.asarray(x, dtype=float) @ self.A.T

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.A, x.shape[:-1] + (2, 2)).copy()


def map_from_spec(spec):
    """Build a map from a ``{"kind": ..., parameters}`` mapping."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    r = spec.pop("r", math.inf)
    r = math.inf if r in ("inf", None) else float(r)
    try:
        if kind == "expanding-circle":
            return ExpandingCircleMap(spec.pop("k", 2), spec.pop("eps", 0.0), r=r)
        if kind == "linear-toral":
            return LinearToralMap(spec.pop("matrix", CAT_MATRIX), r=r)
        if kind == "perturbed-toral":
            return PerturbedToralMap(spec.pop("matrix", CAT_MATRIX), spec.pop("delta", 0.01), r=r)
    except TypeError as exc:
        raise ConfigError(f"bad map parameters: {exc}") from exc
    raise ConfigError(f"unknown map kind {kind!r}")


@dataclass
class Weight:
    """Weight ``g`` on the torus.

    kinds: ``constant`` (``value``), ``trig`` (``value + sum a cos(2 pi k.x) + b sin(2 pi k.x)``
    over ``terms``), ``inverse-jacobian`` (``1/|T'|`` or ``1/|det DT|``),
    ``inverse-unstable-jacobian`` (``1/|DT restricted to E^u|``, linear maps) and
    ``callable`` (``func``).
    """

    kind: str = "constant"
    value: complex = 1.0
    terms: list = field(default_factory=list)
    func: object = None
    smoothness: float = math.inf

    KINDS = ("constant", "trig", "inverse-jacobian", "inverse-unstable-jacobian", "callable")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigError(f"unknown weight kind {self.kind!r}")
        if self.kind == "callable" and not callable(self.func):
            raise ConfigError("callable weight needs func")

    @classmethod
    def constant(cls, c):
        return cls("constant", value=c)

    @property
    def is_constant(self):
        return self.kind == "constant" or (self.kind == "trig" and not self.terms)

    @property
    def is_zero(self):
        return self.kind in ("constant", "trig") and self.value == 0 and not self.terms

    def __call__(self, x, model=None):
        x = np.asarray(x, dtype=float)
        shape = x.shape if (model is None or model.d == 1) else x.shape[:-1]
        if self.kind == "constant":
            return np.full(shape, self.value, dtype=complex if isinstance(self.value, complex) else float)
        if self.kind == "trig":
            out = np.full(shape, complex(self.value))
            for t in self.terms:
                k = np.atleast_1d(np.asarray(t["k"], dtype=float))
                phase = TWO_PI * (x * k[0] if k.size == 1 else x @ k)
                out = out + t.get("a", 0.0) * np.cos(phase) + t.get("b", 0.0) * np.sin(phase)
            return out.real if np.all(out.imag == 0) else out
        if self.kind == "callable":
            return np.asarray(self.func(x))
        if model is None:
            raise ConfigError(f"weight kind {self.kind!r} needs the map")
        if self.kind == "inverse-jacobian":
            J = model.derivative(x)
            return 1.0 / np.abs(J if model.d == 1 else np.linalg.det(J))
        if not isinstance(model, LinearToralMap) or isinstance(model, PerturbedToralMap):
            raise ConfigError("inverse-unstable-jacobian weight is defined for linear toral maps")
        return np.full(shape, 1.0 / model.lam)

    def to_dict(self):
        if self.kind == "callable":
            return {"kind": "callable"}
        d = {"kind": self.kind}
        if self.kind in ("constant", "trig"):
            d["value"] = self.value
        if self.kind == "trig":
            d["terms"] = [dict(t) for t in self.terms]
        return d


def weight_from_spec(spec):
    spec = dict(spec)
    kind = spec.pop("kind", "constant")
    return Weight(kind, value=spec.pop("value", 1.0), terms=spec.pop("terms", []))


def birkhoff_weight(model, g, x, m):
    """``g^{(m)}(x) = prod_{s<m} g(T^s x)`` (vectorised over ``x``)."""
    m = check_int(m, "m", minimum=0)
    x = np.asarray(x, dtype=float)
    out = None
    for _ in range(m):
        val = g(x, model)
        out = val if out is None else out * val
        x = model.evaluate(x)
    if out is None:
        shape = x.shape if model.d == 1 else x.shape[:-1]
        return np.ones(shape)
    return out


# hyperbolicity exponents -----------------------------------------------------

def _jacobian_product(model, x, m):
    """``DT^m_x`` and the orbit endpoint, vectorised over points ``x[..., 2]``."""
    J = np.broadcast_to(np.eye(2), x.shape[:-1] + (2, 2)).copy()
    for _ in range(m):
        J = model.derivative(x) @ J
        x = model.evaluate(x)
    return J, x


def invariant_directions(model, x, n_pre=30):
    """Approximate ``E^s(x)`` and ``E^u(x)`` as unit vectors.

    ``E^u`` is obtained by pushing a vector forward along the ``n_pre``-step
    pre-orbit, ``E^s`` by pulling a vector back along the forward orbit.
    Linear maps return the exact eigendirections.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape[:-1]
    if not isinstance(model, PerturbedToralMap):
        return (np.broadcast_to(model.E_s, shape + (2,)).copy(),
                np.broadcast_to(model.E_u, shape + (2,)).copy())
    n_pre = check_int(n_pre, "n_pre", minimum=1)
    # unstable: pre-orbit then forward push
    pre = [x]
    for _ in range(n_pre):
        pre.append(model.inverse(pre[-1]))
    v = np.broadcast_to(model.E_u, shape + (2,)).copy()
    for s in range(n_pre, 0, -1):
        v = (model.derivative(pre[s]) @ v[..., None])[..., 0]
        v /= np.linalg.norm(v, axis=-1, keepdims=True)
    e_u = v
    # stable: forward orbit then backward pull
    orbit = [x]
    for _ in range(n_pre):
        orbit.append(model.evaluate(orbit[-1]))
    w = np.broadcast_to(model.E_s, shape + (2,)).copy()
    for s in range(n_pre - 1, -1, -1):
        w = np.linalg.solve(model.derivative(orbit[s]), w[..., None])[..., 0]
        w /= np.linalg.norm(w, axis=-1, keepdims=True)
    return w, e_u


def hyperbolicity_exponents(model, x, m, n_pre=30):
    """``(lambda_x(T^m), nu_x(T^m))`` at the point(s) ``x`` (last axis 2).

    For a one-dimensional subbundle the sup and inf coincide with
    ``|DT^m_x v|`` for the unit vector ``v`` spanning it.
    """
    m = check_int(m, "m", minimum=0)
    if model.d != 2:
        raise ConfigError("hyperbolicity exponents are defined for toral maps")
    x = np.asarray(x, dtype=float)
    shape = x.shape[:-1]
    if m == 0:
        return np.ones(shape), np.ones(shape)
    if not isinstance(model, PerturbedToralMap):
        return np.full(shape, model.lam ** (-m)), np.full(shape, model.lam**m)
    e_s, e_u = invariant_directions(model, x, n_pre)
    J, _ = _jacobian_product(model, x, m)
    lam = np.linalg.norm((J @ e_s[..., None])[..., 0], axis=-1)
    nu = np.linalg.norm((J @ e_u[..., None])[..., 0], axis=-1)
    return lam, nu


def lambda_pqm(model, x, p, q, m, n_pre=30):
    """``max(lambda_x(T^m)**p, nu_x(T^m)**q)``."""
    lam, nu = hyperbolicity_exponents(model, x, m, n_pre)
    return np.maximum(lam**p, nu**q)


def hyperbolicity_rates(model, m=8, n_points=32, n_pre=30):
    """Effective ``(lambda_s, nu_u, C)`` from finite-time exponents on a grid.

    Rates are m-th roots of the extreme exponents at time ``m``; ``C`` is the
    smallest constant making the bounds hold for all times up to ``m``.
    """
    if isinstance(model, ExpandingCircleMap):
        return model.lambda_s, None, 1.0
    if not isinstance(model, PerturbedToralMap):
        return model.lambda_s, model.nu_u, 1.0
    g = (np.arange(n_points) + 0.5) / n_points
    X = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    lam_m, nu_m = hyperbolicity_exponents(model, X, m, n_pre)
    lam_s = float(np.max(lam_m)) ** (1.0 / m)
    nu_u = float(np.min(nu_m)) ** (1.0 / m)
    C = 1.0
    for j in range(1, m + 1):
        lj, nj = hyperbolicity_exponents(model, X, j, n_pre)
        C = max(C, float(np.max(lj)) / lam_s**j, nu_u**j / float(np.min(nj)))
    return lam_s, nu_u, C


# cones -----------------------------------------------------------------------

def _sample_points(model, region, n_points):
    if getattr(model, "d", 2) == 1:
        lo, hi = region if region is not None else (0.0, 1.0)
        return np.linspace(lo, hi, n_points, endpoint=region is not None)
    if isinstance(model, (LinearLocalMap,)) or (
            isinstance(model, LinearToralMap) and not isinstance(model, PerturbedToralMap)):
        return np.zeros((1, 2))  # constant Jacobian
    (x0, x1), (y0, y1) = region if region is not None else ((0.0, 1.0), (0.0, 1.0))
    gx = x0 + (x1 - x0) * np.arange(n_points) / n_points
    gy = y0 + (y1 - y0) * np.arange(n_points) / n_points
    return np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1).reshape(-1, 2)


def _directions(n_angles, extra=()):
    th = np.concatenate([np.pi * np.arange(n_angles) / n_angles, np.mod(np.asarray(extra, float), np.pi)])
    return th, np.stack([np.cos(th), np.sin(th)], axis=-1)


def _cone_edges(center, halfwidth):
    return (center - halfwidth, center + halfwidth)


def weakest_contraction(model, cones=None, region=None, n_angles=720, n_points=64):
    """``||T||_+``: sup of ``|DT_x^tr xi| / |xi|`` over ``DT_x^tr xi`` outside Θ_-.

    For 1D maps this is ``sup |T'|``.  The closed constraint boundary is
    included, which gives the same supremum.
    """
    pts = _sample_points(model, region, n_points)
    if model.d == 1:
        return float(np.max(np.abs(model.derivative(pts))))
    if cones is None:
        raise ConfigError("2D weakest contraction needs a cone system")
    th, eta = _directions(n_angles, _cone_edges(cones.minus_center, cones.minus_halfwidth))
    keep = ~cones.in_minus(th, interior=True)
    if not np.any(keep):
        raise ConfigError("empty constraint set: Θ_- covers every direction")
    eta = eta[keep]
    best = 0.0
    for J in model.derivative(pts):
        xi = np.linalg.solve(J.T, eta.T).T  # DT^tr xi = eta
        best = max(best, float(np.max(1.0 / np.linalg.norm(xi, axis=1))))
    return best


def weakest_expansion(model, cones=None, region=None, n_angles=720, n_points=64):
    """``||T||_-``: inf of ``|DT_x^tr xi| / |xi|`` over ``xi`` outside Θ'_+ (Θ_+ for one pair)."""
    pts = _sample_points(model, region, n_points)
    if model.d == 1:
        return float(np.min(np.abs(model.derivative(pts))))
    if cones is None:
        raise ConfigError("2D weakest expansion needs a cone system")
    plus = cones.prime if cones.prime is not None else cones
    th, xi = _directions(n_angles, _cone_edges(plus.plus_center, plus.plus_halfwidth))
    keep = ~plus.in_plus(th, interior=True)
    if not np.any(keep):
        raise ConfigError("empty constraint set: Θ_+ covers every direction")
    xi = xi[keep]
    best = math.inf
    for J in model.derivative(pts):
        best = min(best, float(np.min(np.linalg.norm(xi @ J, axis=1))))
    return best


def cone_hyperbolicity_check(model, cones, region=None, two_pair=False, n_angles=720, n_points=64):
    """Check ``DT_x^tr(R^2 minus int Θ_+) ⊂ int Θ_- ∪ {0}`` on a point/angle grid.

    With ``two_pair`` the source cone is Θ'_+.  Returns ``(ok, witness)``
    where ``witness`` is ``None`` or ``{"x": ..., "xi_angle": ...}``.
    """
    source = cones.prime if (two_pair and cones.prime is not None) else cones
    if two_pair and cones.prime is None:
        raise ConfigError("two-pair check needs cones.prime")
    th, xi = _directions(n_angles, _cone_edges(source.plus_center, source.plus_halfwidth))
    keep = ~source.in_plus(th, interior=True)
    th, xi = th[keep], xi[keep]
    for x, J in zip(_sample_points(model, region, n_points), model.derivative(_sample_points(model, region, n_points))):
        img = xi @ J  # rows are DT^tr xi
        ang = np.arctan2(img[:, 1], img[:, 0])
        bad = ~(cones.in_minus(ang, interior=True) | (np.linalg.norm(img, axis=1) == 0))
        if np.any(bad):
            i = int(np.argmax(bad))
            return False, {"x": np.asarray(x).tolist(), "xi_angle": float(th[i])}
    return True, None


def angular_distance(a, b):
    return _angdist(a, b)
