"""Periodic orbits, flat traces and the dynamical Fredholm determinant.

``d(z) = exp(-sum_m z^m t_m / m)`` is expanded as a power series from the
periodic-orbit trace sums ``t_m``.  Its zeros are located inside a
reliability disc estimated from the decay of the Taylor coefficients and
can be matched against transfer-operator eigenvalues (``1/z`` <-> ``lambda``).
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._validation import ConfigError, ConvergenceError, NumericalError, check_int
from .dynamics import (ExpandingCircleMap, LinearToralMap, PerturbedToralMap,
                       _all_itineraries, _jacobian_product, birkhoff_weight, invariant_directions)

__all__ = [
    "PeriodicOrbitData",
    "DeterminantSeries",
    "BoundEstimate",
    "MatchingTable",
    "periodic_points",
    "trace_sum",
    "determinant_coefficients",
    "determinant_series",
    "reliability_radius",
    "determinant_zeros",
    "rho_pqm",
    "rho_pq_sequence",
    "rho_pq_limit",
    "R_pqt",
    "bound_estimate",
    "compare_zeros_eigenvalues",
]

MAX_PERIOD = {"expanding-circle": 20, "linear-toral": 14, "perturbed-toral": 14}
TAIL_TARGET = 1e-6


@dataclass
class PeriodicOrbitData:
    """Fixed points of ``T^m`` with ``DT^m`` at each point.

    ``orbits[i, s]`` is ``T^s(points[i])``.  For linear toral maps the
    points are exact rationals ``numerators / denominator``.
    """

    period: int
    points: np.ndarray
    jacobians: np.ndarray
    orbits: np.ndarray
    method: str
    numerators: np.ndarray = None
    denominator: int = None

    @property
    def count(self):
        return len(self.points)


# orbit enumeration ---------------------------------------------------------

def _expanding_periodic(model, m, tol=1e-15, max_iter=200):
    its = _all_itineraries(model.k, m)[:-1]  # all-(k-1) duplicates the fixed point 0
    x = np.full(len(its), 0.5)

    def compose(x):
        chain = [x]
        y = x
        for s in range(m - 1, -1, -1):
            y = model.inverse_branch(its[:, s], y)
            chain.append(y)
        return y, chain[::-1]  # chain[s] = T^s(result), chain[m] = input

    for _ in range(max_iter):
        y, chain = compose(x)
        done = np.max(np.abs(y - x)) <= tol
        x = y
        if done:
            break
    else:
        raise ConvergenceError(f"periodic point iteration for period {m} did not converge")
    # Newton polish on x - G(x), G the composed inverse branch
    for _ in range(3):
        y, chain = compose(x)
        dG = np.prod(1.0 / model.derivative(np.stack(chain[:m], axis=1)), axis=1)
        x = x - (x - y) / (1.0 - dG)
    y, chain = compose(x)
    orbits = np.stack(chain[:m], axis=1)
    orbits[:, 0] = x
    jac = np.prod(model.derivative(orbits), axis=1)
    return PeriodicOrbitData(m, x, jac, orbits, "itinerary-contraction+newton")


def _hermite_cosets(B):
    """Representatives of Z^2 / B Z^2 (lower-triangular Hermite form)."""
    (b00, b01), (b10, b11) = (int(v) for v in B[0]), (int(v) for v in B[1])
    g, u, v = _egcd(b00, b01)
    col1 = (u * b00 + v * b01, u * b10 + v * b11)
    col2 = (0, (-b01 // g) * b10 + (b00 // g) * b11)
    a, c = abs(col1[0]), abs(col2[1])
    i, j = np.meshgrid(np.arange(a, dtype=np.int64), np.arange(c, dtype=np.int64), indexing="ij")
    return np.stack([i.ravel(), j.ravel()], axis=1)


def _egcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def _matpow(A, m):
    out = np.eye(2, dtype=object)
    Ao = np.asarray(A, dtype=object)
    for _ in range(m):
        out = out.dot(Ao)
    return out


def _linear_periodic(model, m):
    Am = _matpow(model.A, m)
    B = Am - np.eye(2, dtype=object)
    det = int(B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0])
    D = abs(det)
    adj = np.array([[B[1, 1], -B[0, 1]], [-B[1, 0], B[0, 0]]], dtype=object)
    reps = _hermite_cosets(B).astype(object)
    sign = 1 if det > 0 else -1
    num = np.mod(reps.dot(adj.T) * sign, D).astype(np.int64)
    orbit_num = [num]
    A64 = model.A.astype(np.int64)
    for _ in range(m - 1):
        orbit_num.append(np.mod(orbit_num[-1] @ A64.T, D))
    orbits = np.stack(orbit_num, axis=1) / D
    jac = np.broadcast_to(np.asarray(Am, dtype=float), (len(num), 2, 2)).copy()
    return PeriodicOrbitData(m, num / D, jac, orbits, "hermite-lattice-exact", num, D)


def _perturbed_periodic(model, m, steps=8, tol=1e-12, max_iter=50):
    base = _linear_periodic(model, m)
    x = base.points.copy()
    delta = model.delta
    lin = PerturbedToralMap.__new__(PerturbedToralMap)
    lin.__dict__.update(model.__dict__)
    for s in range(1, steps + 1):
        lin.delta = delta * s / steps
        for it in range(max_iter):
            J, y = _jacobian_product(lin, x, m)
            r = _lift_power(lin, x, m) - x
            r -= np.round(r)
            step = np.linalg.solve(J - np.eye(2), r[..., None])[..., 0]
            x = np.mod(x - step, 1.0)
            if np.max(np.abs(step)) <= tol:
                break
        else:
            bad = int(np.argmax(np.max(np.abs(step), axis=1)))
            raise ConvergenceError(
                f"Newton continuation failed at delta={lin.delta:.3g} for orbit seed {base.points[bad].tolist()}")
    J, _ = _jacobian_product(model, x, m)
    orbits = [x]
    for _ in range(m - 1):
        orbits.append(model.evaluate(orbits[-1]))
    return PeriodicOrbitData(m, x, J, np.stack(orbits, axis=1), f"newton-continuation-{steps}")


def _lift_power(model, x, m):
    # T^m(x) mod 1 reported as a point near x for the residual
    return model.iterate(x, m)


def periodic_points(model, m):
    """All fixed points of ``T^m``."""
    m = check_int(m, "m", minimum=1, maximum=MAX_PERIOD.get(model.kind, 14))
    if isinstance(model, ExpandingCircleMap):
        return _expanding_periodic(model, m)
    if isinstance(model, PerturbedToralMap):
        return _perturbed_periodic(model, m)
    if isinstance(model, LinearToralMap):
        return _linear_periodic(model, m)
    raise ConfigError(f"periodic points are not defined for {type(model).__name__}")


def _exact_constant(g):
    if g.kind != "constant" or isinstance(g.value, complex):
        return None
    return Fraction(g.value)


def trace_sum(model, g, m, orbits=None):
    """Flat trace ``t_m``.

    Toral maps: ``sum g^{(m)}(x) / |det(I - DT^m(x))|``.  Expanding maps
    (operator summing over inverse branches): ``sum g^{(m)}(x) / |1 - 1/(T^m)'(x)|``.
    Linear toral maps with a constant weight return an exact ``Fraction``.
    """
    data = orbits if orbits is not None else periodic_points(model, m)
    if isinstance(model, ExpandingCircleMap):
        den = np.abs(1.0 - 1.0 / data.jacobians)
    else:
        I = np.eye(2)
        den = np.abs(np.linalg.det(I - data.jacobians))
        if data.denominator is not None:
            c = _exact_constant(g)
            if c is not None:
                return c**m * Fraction(data.count, data.denominator)
    if np.any(den < 1e-12):
        raise NumericalError(f"parabolic periodic point for period {m}: |det(1 - DT^m)| < 1e-12")
    if g.is_constant and not isinstance(g.value, complex):
        return math.fsum(np.full(data.count, float(g.value) ** m) / den)
    vals = np.prod(g(data.orbits, model), axis=1) / den
    if np.iscomplexobj(vals) and np.any(vals.imag != 0):
        return complex(math.fsum(vals.real), math.fsum(vals.imag))
    return math.fsum(np.real(vals))


def determinant_coefficients(traces):
    """Taylor coefficients of ``exp(-sum t_m z^m / m)``.

    ``a_0 = 1`` and ``a_m = -(1/m) sum_{j=1}^m t_j a_{m-j}``.  Exact
    (``Fraction``/``int``) traces give exact coefficients.
    """
    traces = list(traces)
    if not traces:
        raise ConfigError("need at least one trace")
    exact = all(isinstance(t, (int, Fraction)) for t in traces)
    a = [Fraction(1) if exact else 1.0]
    for m in range(1, len(traces) + 1):
        terms = [traces[j - 1] * a[m - j] for j in range(1, m + 1)]
        if exact:
            a.append(-sum(terms, Fraction(0)) / m)
        elif any(isinstance(t, complex) for t in terms):
            a.append(-complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms)) / m)
        else:
            a.append(-math.fsum(float(t) for t in terms) / m)
    return a


def _noise_floor(traces, a):
    """Per-coefficient rounding scale of the recursion (0 for exact input).

    ``a_m`` is a sum of terms ``t_j a_{m-j} / m``; its rounding error is a
    small multiple of machine epsilon times the sum of their magnitudes.
    """
    if all(isinstance(v, Fraction) for v in a):
        return np.zeros(len(a))
    t = np.abs(np.asarray([complex(v) for v in traces]))
    av = np.abs(np.asarray([complex(v) for v in a]))
    floor = np.zeros(len(a))
    for m in range(1, len(a)):
        floor[m] = 8 * np.finfo(float).eps * float(np.sum(t[:m] * av[m - 1::-1])) / m
    return floor


def significant_degree(coefficients, floor=None):
    """Index of the last coefficient standing above its rounding floor."""
    a = np.abs(np.asarray([complex(v) for v in coefficients]))
    floor = np.zeros(len(a)) if floor is None else np.asarray(floor, dtype=float)
    sig = np.nonzero(a > floor)[0]
    return int(sig[-1]) if len(sig) else 0


def _decay_fit(a, M_eff):
    """Geometric fit ``log|a_m| ~ alpha + beta m`` over the last third of ``1..M_eff``."""
    idx = np.arange(1, M_eff + 1)
    idx = idx[a[idx] > 0]
    if len(idx) < 2:
        return None
    window = idx[idx >= idx[-1] - max(1, (len(idx) - 1) // 3)]
    beta, alpha = np.polyfit(window, np.log(a[window]), 1)
    return alpha, beta


def reliability_radius(coefficients, floor=None, target=TAIL_TARGET):
    """Largest ``R`` whose estimated truncation error on ``|z| = R`` stays below ``target``.

    Coefficients above the rounding floor are kept and carry their floor as
    error.  Coefficients at noise level, and everything past the last
    computed order, are bounded by the geometric decay fitted over the last
    third of the kept coefficients (noise-level ones by at most twice their
    floor).  Without a decay fit the noise-level coefficients enter at twice
    their floor and nothing beyond the computed order is assumed.
    """
    a = np.abs(np.asarray([complex(v) for v in coefficients]))
    M = len(a) - 1
    floor = np.zeros(M + 1) if floor is None else np.asarray(floor, dtype=float)
    M_eff = significant_degree(coefficients, floor)
    fit = _decay_fit(a, M_eff)
    exact = not np.any(floor > 0)
    if exact and M_eff < M:
        return math.inf  # exactly terminating series
    bound = np.zeros(M + 1)
    bound[1:M_eff + 1] = floor[1:M_eff + 1]
    m_drop = np.arange(M_eff + 1, M + 1)
    bound[m_drop] = 2.0 * floor[m_drop]
    if fit is not None:
        alpha, beta = fit
        bound[m_drop] = np.minimum(bound[m_drop], np.exp(alpha + beta * m_drop))

    def error(R):
        with np.errstate(over="ignore"):
            e = float(np.sum(bound * R ** np.arange(M + 1)))
        if fit is not None:
            x = math.exp(fit[1]) * R
            if x >= 1:
                return math.inf
            e += math.exp(fit[0]) * x ** (M + 1) / (1 - x)
        return e

    if error(0.0) >= target:
        return 0.0
    lo, hi = 0.0, 1.0
    while error(hi) < target:
        lo, hi = hi, 2 * hi
        if hi > 1e12:
            return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if error(mid) < target:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class DeterminantSeries:
    """Traces ``t_1..t_M``, coefficients ``a_0..a_M`` and the reliability radius."""

    traces: list
    coefficients: list
    reliability_radius: float
    noise_floor: np.ndarray = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_traces(cls, traces, **meta):
        a = determinant_coefficients(traces)
        floor = _noise_floor(traces, a)
        return cls(list(traces), a, reliability_radius(a, floor), floor, dict(meta))

    @classmethod
    def from_coefficients(cls, coefficients):
        """Series for a given polynomial, taken as exact (infinite reliability radius)."""
        a = list(coefficients)
        return cls([], a, math.inf, np.zeros(len(a)), {"polynomial": True})

    @property
    def M(self):
        return len(self.coefficients) - 1

    @property
    def significant_degree(self):
        return significant_degree(self.coefficients, self.noise_floor)

    def clean_coefficients(self):
        """Coefficients with the noise-level tail set to zero."""
        k = self.significant_degree
        a = list(self.coefficients)
        zero = a[0] * 0
        return a[: k + 1] + [zero] * (len(a) - k - 1)

    def evaluate(self, z):
        c = np.asarray([complex(v) for v in self.coefficients])
        return np.polyval(c[::-1], z)

    def log_traces(self, count=None):
        """Traces recovered from ``-z d'(z)/d(z)`` of the truncated polynomial."""
        a = [complex(v) for v in self.coefficients]
        count = self.M if count is None else count
        t = []
        for m in range(1, count + 1):
            s = -m * a[m] - sum(t[j - 1] * a[m - j] for j in range(1, m))
            t.append(s)
        return t


def determinant_series(model, g, M, threads=1):
    """Traces for periods ``1..M`` and the resulting determinant series."""
    M = check_int(M, "M", minimum=1, maximum=MAX_PERIOD.get(model.kind, 14))
    from ._parallel import ordered_map
    traces = ordered_map(lambda m: trace_sum(model, g, m), range(1, M + 1), threads)
    return DeterminantSeries.from_traces(traces, map=model.kind)


def _poly_roots(a):
    a = np.asarray([complex(v) for v in a])
    nz = np.nonzero(a)[0]
    if len(nz) == 0 or nz[-1] == 0:
        return np.array([], dtype=complex)
    a = a[: nz[-1] + 1]
    return np.roots(a[::-1])


def _newton_polish(a, z, iters=8):
    c = np.asarray([complex(v) for v in a])[::-1]
    dc = np.polyder(c)
    for _ in range(iters):
        d = np.polyval(dc, z)
        ok = d != 0
        z = np.where(ok, z - np.polyval(c, z) / np.where(ok, d, 1), z)
    return z


def determinant_zeros(series, radius=None, agree_tol=1e-8, cluster_tol=1e-6):
    """Zeros of the truncated determinant inside the reliability disc.

    Returns ``(zeros, diagnostic)`` with ``zeros`` a list of ``(z, order)``.
    Coefficients below their rounding floor are dropped first.  A root counts
    only if the truncation two orders lower has a root within ``agree_tol``
    (skipped for a series built from an exact polynomial); roots closer than
    ``cluster_tol`` merge into one zero whose order is the cluster size.
    """
    if not isinstance(series, DeterminantSeries):
        series = DeterminantSeries.from_coefficients(series)
    a = series.clean_coefficients()
    R = series.reliability_radius if radius is None else min(radius, series.reliability_radius)
    if R <= 0:
        return [], "reliability radius is zero; no zeros can be certified"
    roots = _poly_roots(a)
    if len(roots) == 0:
        return [], "determinant truncation is a nonzero constant: no zeros"
    roots = _newton_polish(a, roots)
    roots = roots[np.abs(roots) < R]
    if len(a) > 3 and not series.meta.get("polynomial"):
        lower = _poly_roots(a[:-2])
        if len(lower):
            lower = _newton_polish(a[:-2], lower)
            dist = np.min(np.abs(roots[:, None] - lower[None, :]), axis=1) if len(roots) else np.array([])
            roots = roots[dist <= agree_tol * np.maximum(1.0, np.abs(roots))]
        else:
            roots = roots[:0]
    # clustering (order): sort by modulus then argument for a deterministic order
    roots = sorted(roots, key=lambda z: (round(abs(z), 12), round(float(np.angle(z)), 12)))
    zeros = []
    used = [False] * len(roots)
    for i, z in enumerate(roots):
        if used[i]:
            continue
        group = [z]
        for j in range(i + 1, len(roots)):
            if not used[j] and abs(roots[j] - z) <= cluster_tol * max(1.0, abs(z)):
                used[j] = True
                group.append(roots[j])
        zc = complex(np.mean(group))
        if abs(zc.imag) < 1e-13 * max(1.0, abs(zc)):
            zc = complex(zc.real, 0.0)
        zeros.append((zc, len(group)))
    diag = "ok" if zeros else f"no zeros certified inside radius {R:.6g}"
    return zeros, diag


# bound quantities ---------------------------------------------------------

def _quadrature_points(n_quad, method, seed):
    if method == "trapezoid":
        g = np.arange(n_quad) / n_quad
        return np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    if method == "montecarlo":
        rng = np.random.default_rng(seed)
        return rng.random((n_quad * n_quad, 2))
    raise ConfigError(f"unknown quadrature method {method!r}")


def _integrand_sequence(model, g, p, q, ms, points, n_pre, t=None):
    """``|g^{(m)}| lambda^{(p,q,m)}`` (times ``|det DT^m|^{1/t}``) at each point, for each m in ms."""
    if model.d != 2:
        raise ConfigError("bound quantities are defined for toral maps")
    ms = sorted(ms)
    out = {}
    linear = not isinstance(model, PerturbedToralMap)
    if not linear:
        e_s, e_u = invariant_directions(model, points, n_pre)
    J = np.broadcast_to(np.eye(2), points.shape[:-1] + (2, 2)).copy()
    gm = np.ones(len(points))
    x = points
    for m in range(1, ms[-1] + 1):
        gm = gm * np.abs(g(x, model))
        J = model.derivative(x) @ J
        x = model.evaluate(x)
        if m not in ms:
            continue
        if linear:
            lam = np.full(len(points), model.lam ** (-m))
            nu = np.full(len(points), model.lam ** m)
        else:
            lam = np.linalg.norm((J @ e_s[..., None])[..., 0], axis=-1)
            nu = np.linalg.norm((J @ e_u[..., None])[..., 0], axis=-1)
        val = gm * np.maximum(lam**p, nu**q)
        if t is not None and not math.isinf(t):
            val = val * np.abs(np.linalg.det(J)) ** (1.0 / t)
        out[m] = val
    return out


def rho_pqm(model, g, p, q, m, n_quad=256, method="trapezoid", seed=0, n_pre=30):
    """``int |g^{(m)}(x)| lambda^{(p,q,m)}(x) dx`` over the torus.

    Returns ``(value, stderr)``; ``stderr`` is 0 for the trapezoid rule.
    """
    m = check_int(m, "m", minimum=1)
    pts = _quadrature_points(n_quad, method, seed)
    vals = _integrand_sequence(model, g, p, q, [m], pts, n_pre)[m]
    se = 0.0 if method == "trapezoid" else float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
    return float(math.fsum(vals) / len(vals)), se


def rho_pq_sequence(model, g, p, q, ms, n_quad=256, n_pre=30):
    """``rho^{p,q}(T,g,m)`` for each m in ``ms`` (trapezoid rule, shared orbit work)."""
    pts = _quadrature_points(n_quad, "trapezoid", 0)
    vals = _integrand_sequence(model, g, p, q, ms, pts, n_pre)
    return [float(math.fsum(vals[m]) / len(pts)) for m in sorted(ms)]


def rho_pq_limit(values, ms=None):
    """Extrapolate ``lim rho_m^{1/m}``: last root plus the Cauchy diagnostic.

    ``values`` are the raw ``rho^{p,q}(T,g,m)``; ``ms`` their periods
    (default ``1..len``).  The diagnostic is the largest successive
    difference of the m-th roots over the final half of the sequence.
    """
    values = list(values)
    if len(values) < 4:
        raise ConfigError("need at least 4 values of m")
    ms = list(range(1, len(values) + 1)) if ms is None else list(ms)
    roots = [v ** (1.0 / m) if v > 0 else 0.0 for v, m in zip(values, ms)]
    half = roots[len(roots) // 2 - 1:] if len(roots) >= 2 else roots
    diag = max((abs(b - a) for a, b in zip(half, half[1:])), default=0.0)
    return roots[-1], diag


def R_pqt(model, g, p, q, t, ms=(2, 4, 6, 8), n_quad=256, n_pre=30):
    """``R^{p,q,t}``: m-th root of the grid supremum at the largest m, with a Cauchy diagnostic."""
    t = math.inf if t in ("inf", None) else float(t)
    if t <= 1:
        raise ConfigError("t must lie in (1, inf]")
    pts = _quadrature_points(n_quad, "trapezoid", 0)
    vals = _integrand_sequence(model, g, p, q, list(ms), pts, n_pre, t=t)
    sups = [float(np.max(vals[m])) for m in sorted(ms)]
    roots = [s ** (1.0 / m) if s > 0 else 0.0 for s, m in zip(sups, sorted(ms))]
    half = roots[len(roots) // 2 - 1:]
    diag = max((abs(b - a) for a, b in zip(half, half[1:])), default=0.0)
    return roots[-1], diag


@dataclass
class BoundEstimate:
    p: float
    q: float
    ms: list
    rho_roots: list
    rho: float
    rho_cauchy: float
    R: dict

    def to_dict(self):
        return {"p": self.p, "q": self.q, "m": list(self.ms), "rho_roots": list(self.rho_roots),
                "rho": self.rho, "rho_cauchy": self.rho_cauchy,
                "R": {str(k): v for k, v in self.R.items()}}


def bound_estimate(model, g, p, q, ms=range(1, 9), ts=(2.0, 4.0, math.inf), n_quad=256, n_pre=30):
    ms = list(ms)
    seq = rho_pq_sequence(model, g, p, q, ms, n_quad, n_pre)
    rho, diag = rho_pq_limit(seq, ms)
    roots = [v ** (1.0 / m) if v > 0 else 0.0 for v, m in zip(seq, ms)]
    R = {}
    for t in ts:
        R["inf" if math.isinf(t) else t] = R_pqt(model, g, p, q, t, ms, n_quad, n_pre)[0]
    return BoundEstimate(p, q, ms, roots, rho, diag, R)


# cross validation ---------------------------------------------------------

@dataclass
class MatchingTable:
    pairs: list
    unmatched_zeros: list
    unmatched_resonances: list
    radius: float

    @property
    def perfect(self):
        return not self.unmatched_zeros and not self.unmatched_resonances

    @property
    def max_distance(self):
        return max((d for _, _, d in self.pairs), default=0.0)

    def rows(self):
        out = [("matched", z, lam, d) for z, lam, d in self.pairs]
        out += [("zero-only", z, None, None) for z in self.unmatched_zeros]
        out += [("resonance-only", None, lam, None) for lam in self.unmatched_resonances]
        return out


def compare_zeros_eigenvalues(resonances, zeros, radius, tol=1e-5):
    """Match reciprocal zeros ``1/z`` (``|z| < radius``) with eigenvalues ``|lambda| > 1/radius``.

    ``resonances`` is a list of eigenvalues (a :class:`ResonanceReport` is
    accepted too); ``zeros`` a list of ``(z, order)``.  Orders and
    multiplicities are expanded before an optimal assignment; pairs further
    apart than ``tol`` count as unmatched on both sides.
    """
    if hasattr(resonances, "eigenvalues"):
        resonances = [v for v, mu in zip(resonances.eigenvalues, resonances.multiplicities)
                      for _ in range(int(mu))]
    inv = []
    for z, order in zeros:
        if abs(z) < radius:
            inv += [1.0 / complex(z)] * int(order)
    lam = [complex(v) for v in resonances if abs(v) * radius > 1.0]
    if not inv or not lam:
        return MatchingTable([], inv, lam, radius)
    D = np.abs(np.asarray(inv)[:, None] - np.asarray(lam)[None, :])
    rows, cols = linear_sum_assignment(D)
    pairs, used_r, used_c = [], set(), set()
    for i, j in zip(rows, cols):
        if D[i, j] <= tol:
            pairs.append((inv[i], lam[j], float(D[i, j])))
            used_r.add(i)
            used_c.add(j)
    return MatchingTable(pairs,
                         [v for i, v in enumerate(inv) if i not in used_r],
                         [v for j, v in enumerate(lam) if j not in used_c],
                         radius)
