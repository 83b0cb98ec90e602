"""Truncated transfer-operator matrices, resonances and the compact-plus-small splitting.

Expanding maps use the operator ``(L u)(x) = sum_{T y = x} g(y) u(y)``, whose
Fourier matrix is ``M[k, k'] = int g(y) |T'(y)| exp(2 pi i (k' y - k T(y))) dy``.
Toral maps use ``L u = g . u o T`` with ``M[k, k'] = int g(x) exp(2 pi i (k'.T(x) - k.x)) dx``.
"""
import dataclasses
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from threadpoolctl import threadpool_limits

from ._parallel import ordered_map
from ._validation import ConfigError, NumericalError, check_int, check_real
from .dynamics import (ExpandingCircleMap, LinearToralMap, LocalBranch, PerturbedToralMap,
                       Weight, hyperbolicity_rates, weakest_contraction, weakest_expansion)
from .fourier_dyadic import (ConeSystem, GridFunction, _angle, _psi_radial, _psi_tilde_radial,
                             block_symbol, chi, cover_index, dyadic_blocks, grid_points,
                             holder_norm_star)

__all__ = [
    "OperatorMatrix",
    "ResonanceReport",
    "LinkageRelation",
    "assemble_expanding",
    "assemble_hyperbolic",
    "anisotropic_weight",
    "eigenvalues",
    "essential_radius_filter",
    "spectral_radius_weight",
    "resonances",
    "apply_expanding",
    "local_operator",
    "split_L0_L1",
    "SplitResult",
    "measure_L0_bound",
    "lacunary_samples",
    "support_distance",
]


@dataclass
class OperatorMatrix:
    """Dense matrix on a truncated frequency index set.

    ``index`` has one row per basis mode: integers ``k`` (1D) or pairs (2D).
    """

    matrix: np.ndarray
    index: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def size(self):
        return self.matrix.shape[0]

    def apply(self, coeffs):
        return self.matrix @ np.asarray(coeffs)

    def to_dict(self):
        return {"size": self.size, "index": self.index.tolist(), **self.meta}


def _index_1d(N_f):
    return np.arange(-N_f, N_f + 1)


def _index_2d(N_f):
    k = np.arange(-N_f, N_f + 1)
    K1, K2 = np.meshgrid(k, k, indexing="ij")
    return np.stack([K1.ravel(), K2.ravel()], axis=1)


DROP_TOL = 1e-14


def _drop_noise(M, drop_tol):
    """Zero entries at quadrature-noise level.

    Entries far from the frequency diagonal of the map are exponentially
    small; FFT quadrature returns them as ~1e-17 noise, which the
    exponentially ill-conditioned eigenproblem would amplify.  Exact zeros
    are a far smaller perturbation.
    """
    if drop_tol and M.size:
        M[np.abs(M) < drop_tol * np.max(np.abs(M))] = 0.0
    return M


def assemble_expanding(model, g, N_f, quadrature_points=None, threads=None, drop_tol=DROP_TOL):
    """Fourier matrix of the inverse-branch transfer operator on ``|k| <= N_f``.

    Rows are computed independently: row ``k`` is the FFT of
    ``g |T'| exp(-2 pi i k T)`` sampled at ``Q`` equispaced points.  Entries
    below ``drop_tol`` times the largest one are set to zero.
    """
    if not isinstance(model, ExpandingCircleMap):
        raise ConfigError("assemble_expanding needs an expanding circle map")
    N_f = check_int(N_f, "N_f", minimum=1)
    Q = 16 * N_f if quadrature_points is None else check_int(quadrature_points, "quadrature_points")
    if Q < 8 * N_f:
        raise ConfigError(f"quadrature_points={Q} too small; need at least 8*N_f = {8 * N_f}")
    y = np.arange(Q) / Q
    amp = g(y, model) * np.abs(model.derivative(y))
    lift = model.lift(y)
    ks = _index_1d(N_f)
    cols = np.mod(ks, Q)

    def row(k):
        return np.fft.ifft(amp * np.exp(-2j * np.pi * k * lift))[cols]

    rows = ordered_map(row, ks, threads)
    M = _drop_noise(np.array(rows, dtype=complex), drop_tol)
    return OperatorMatrix(M, ks, {"kind": "expanding", "N_f": N_f, "quadrature_points": Q,
                                  "drop_tol": drop_tol})


def apply_expanding(model, g, u, x):
    """Pointwise ``sum_{T y = x} g(y) u(y)`` for a grid function ``u`` (oracle for the matrix)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(len(x), dtype=complex)
    for j in range(model.k):
        y = model.inverse_branch(j, x)
        out += g(y, model) * u.evaluate(y)
    return out


def anisotropic_weight(index, p, q, cones):
    """``w(k) = max(2, |k|) ** (p phi_+(k/|k|) + q phi_-(k/|k|))`` (exponent (p+q)/2 at k = 0)."""
    k = np.asarray(index, dtype=float)
    r = np.sqrt(np.sum(k * k, axis=-1))
    expo = np.full(len(k), 0.5 * (p + q))
    nz = r > 0
    phi = cones.phi_plus(np.arctan2(k[nz, 1], k[nz, 0]))
    expo[nz] = p * phi + q * (1.0 - phi)
    return np.maximum(2.0, r) ** expo


def _trig_coefficients(g):
    """Fourier coefficients {k: c} of a constant or trigonometric weight."""
    coeffs = {(0, 0): complex(g.value)}
    for t in g.terms:
        k = tuple(int(v) for v in np.atleast_1d(t["k"]))
        if len(k) != 2:
            raise ConfigError("toral trig weights need 2D wavevectors")
        a, b = complex(t.get("a", 0.0)), complex(t.get("b", 0.0))
        mk = (-k[0], -k[1])
        coeffs[k] = coeffs.get(k, 0) + a / 2 + b / 2j
        coeffs[mk] = coeffs.get(mk, 0) + a / 2 - b / 2j
    return coeffs


def assemble_hyperbolic(model, g, N_f, p=0.0, q=0.0, cones=None, quadrature_points=None, threads=None,
                        drop_tol=DROP_TOL):
    """Matrix of ``u -> g . u o T`` on the box ``max|k_i| <= N_f``, conjugated by ``w(k)``.

    Linear maps with a constant or trigonometric weight use the exact
    reindexing ``e_k' o T = e_{A^T k'}``; otherwise each column is the 2D FFT
    of ``g exp(2 pi i k'.T(x))``.
    """
    if not isinstance(model, LinearToralMap):
        raise ConfigError("assemble_hyperbolic needs a toral map")
    N_f = check_int(N_f, "N_f", minimum=1)
    idx = _index_2d(N_f)
    n = len(idx)
    pos = {tuple(k): i for i, k in enumerate(idx.tolist())}
    M = np.zeros((n, n), dtype=complex)
    exact = (not isinstance(model, PerturbedToralMap)) and g.kind in ("constant", "trig")
    if exact:
        coeffs = _trig_coefficients(g)
        target = idx @ model.A.astype(np.int64)  # rows: A^T k'
        for j, t in enumerate(target.tolist()):
            for dk, c in coeffs.items():
                if c == 0:
                    continue
                i = pos.get((t[0] + dk[0], t[1] + dk[1]))
                if i is not None:
                    M[i, j] += c
        method = "lattice-reindexing"
        Q = None
    else:
        norm_A = int(np.max(np.sum(np.abs(model.A), axis=1)))
        need = 2 * ((norm_A + 1) * N_f + 16)
        Q = 1 << int(math.ceil(math.log2(need))) if quadrature_points is None else int(quadrature_points)
        X = grid_points(Q, 2)
        TX = model._lift(X)
        gx = g(X, model)
        rows = np.mod(idx, Q)

        def column(kp):
            h = gx * np.exp(2j * np.pi * (TX @ kp.astype(float)))
            c = np.fft.fft2(h) / (Q * Q)
            return c[rows[:, 0], rows[:, 1]]

        cols = ordered_map(column, idx, threads)
        M = _drop_noise(np.array(cols, dtype=complex).T, drop_tol)
        method = "fft-quadrature"
    if cones is not None:
        w = anisotropic_weight(idx, p, q, cones)
        M = (w[:, None] * M) / w[None, :]
    meta = {"kind": "hyperbolic", "N_f": N_f, "method": method, "p": p, "q": q,
            "quadrature_points": Q, "cones": None if cones is None else cones.to_dict()}
    return OperatorMatrix(M, idx, meta)


def eigenvalues(M):
    """All eigenvalues, sorted by modulus (descending) then argument.

    The solve is pinned to one BLAS thread so results do not depend on the
    thread count.
    """
    A = M.matrix if isinstance(M, OperatorMatrix) else np.asarray(M, dtype=complex)
    if not np.all(np.isfinite(A)):
        raise NumericalError("matrix has non-finite entries")
    try:
        with threadpool_limits(limits=1):
            ev = scipy.linalg.eigvals(A)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        fd, path = tempfile.mkstemp(suffix=".npy", prefix="transferlab_matrix_")
        os.close(fd)
        np.save(path, A)
        raise NumericalError(f"eigenvalue solver failed ({exc}); matrix dumped to {path}") from exc
    order = np.lexsort((np.round(np.angle(ev), 12), -np.round(np.abs(ev), 12)))
    return ev[order]


def spectral_radius_weight(model, g, m=12, n_points=64):
    """``R(T^{-1}, g)`` (expanding) or ``R(T, g)`` (toral), estimated by a ratio of suprema.

    Expanding: ``S_m(x) = sum_{T^m y = x} |g^{(m)}(y)|``; toral:
    ``S_m(x) = |g^{(m)}(x)|``.  The estimate is ``sup S_m / sup S_{m-1}``.
    """
    if g.is_zero:
        return 0.0
    if g.is_constant and not isinstance(g.value, complex):
        c = abs(float(g.value))
        return c * model.k if isinstance(model, ExpandingCircleMap) else c
    if isinstance(model, ExpandingCircleMap):
        x = np.arange(n_points) / n_points
        sups = []
        for mm in (m - 1, m):
            total = np.zeros(n_points)
            for i, x0 in enumerate(x):
                ys, _ = model.inverse_branches(x0, mm)
                prod = np.ones(len(ys))
                y = ys
                for _ in range(mm):
                    prod *= np.abs(g(y, model))
                    y = model.evaluate(y)
                total[i] = math.fsum(prod)
            sups.append(float(np.max(total)))
        return sups[1] / sups[0]
    X = grid_points(n_points, 2).reshape(-1, 2)
    gm = np.ones(len(X))
    prev = None
    x = X
    for _ in range(m):
        prev = gm.copy()
        gm = gm * np.abs(g(x, model))
        x = model.evaluate(x)
    return float(np.max(gm) / np.max(prev))


def essential_radius_filter(model, g, p, q=None):
    """Essential-radius bound: ``R(T^{-1},g) lambda_s^p`` or ``R(T,g) max(lambda_s^p, nu_u^q)``."""
    R = spectral_radius_weight(model, g)
    lam_s, nu_u, _ = hyperbolicity_rates(model)
    if isinstance(model, ExpandingCircleMap):
        return R * lam_s**p, {"R": R, "lambda_s": lam_s}
    if q is None:
        raise ConfigError("toral filter needs q")
    return R * max(lam_s**p, nu_u**q), {"R": R, "lambda_s": lam_s, "nu_u": nu_u}


@dataclass
class ResonanceReport:
    """Refinement-stable eigenvalues above the essential-radius filter."""

    eigenvalues: list
    multiplicities: list
    stability: list
    filter: float
    margin: float
    truncations: list
    stability_tol: float
    filter_info: dict = field(default_factory=dict)
    cones: dict = None
    config_hash: str = None

    def to_dict(self):
        return {
            "resonances": [{"re": float(np.real(v)), "im": float(np.imag(v)), "multiplicity": int(mu),
                            "stability": float(s)}
                           for v, mu, s in zip(self.eigenvalues, self.multiplicities, self.stability)],
            "filter": float(self.filter), "margin": float(self.margin),
            "truncations": list(self.truncations), "stability_tol": float(self.stability_tol),
            "filter_info": dict(self.filter_info), "cones": self.cones, "config_hash": self.config_hash,
        }


def _spectrum(model, g, N_f, p, q, cones, threads):
    if isinstance(model, ExpandingCircleMap):
        return eigenvalues(assemble_expanding(model, g, N_f, threads=threads))
    return eigenvalues(assemble_hyperbolic(model, g, N_f, p, q, cones, threads=threads))


def resonances(model, g, N_f, p, q=None, cones=None, refinement=2, stability_tol=1e-6, margin=0.05,
               threads=None):
    """Eigenvalues stable between truncations ``N_f`` and ``refinement * N_f`` and above the filter.

    An eigenvalue of the coarse matrix is accepted when the fine matrix has
    an eigenvalue within ``stability_tol`` and its modulus exceeds
    ``filter + margin``.  Reported values come from the fine truncation.
    """
    N_f = check_int(N_f, "N_f", minimum=1)
    refinement = check_int(refinement, "refinement", minimum=2)
    stability_tol = check_real(stability_tol, "stability_tol", minimum=0.0, strict=True)
    margin = check_real(margin, "margin", minimum=0.0)
    filt, info = essential_radius_filter(model, g, p, q)
    if isinstance(model, LinearToralMap) and cones is None:
        cones = model.adapted_cones()
    if isinstance(model, ExpandingCircleMap):
        cones = None
    coarse, fine = ordered_map(lambda n: _spectrum(model, g, n, p, q, cones, 1),
                               [N_f, refinement * N_f], threads)
    thr = filt + margin
    accepted, dist = [], []
    used = np.zeros(len(fine), dtype=bool)
    for lam in coarse[np.abs(coarse) > thr]:
        d = np.abs(fine - lam)
        d[used] = np.inf
        j = int(np.argmin(d))
        if d[j] <= stability_tol and abs(fine[j]) > thr:
            used[j] = True
            accepted.append(complex(fine[j]))
            dist.append(float(d[j]))
    vals, mults, stab = [], [], []
    for lam, d in zip(accepted, dist):
        for i, v in enumerate(vals):
            if abs(v - lam) <= 10 * stability_tol:
                mults[i] += 1
                stab[i] = max(stab[i], d)
                break
        else:
            vals.append(lam)
            mults.append(1)
            stab.append(d)
    vals = [complex(v.real, 0.0) if abs(v.imag) < 1e-13 else v for v in vals]
    return ResonanceReport(vals, mults, stab, filt, margin, [N_f, refinement * N_f], stability_tol,
                           info, None if cones is None else cones.to_dict())


# linkage and splitting ------------------------------------------------------

@dataclass
class LinkageRelation:
    """Linkage rule ``(l, tau) -> (n, sigma)`` built from ``||T||_+`` and ``||T||_-``."""

    norm_plus: float
    norm_minus: float = None
    kind: str = "expanding"

    def __post_init__(self):
        if self.kind not in ("expanding", "hyperbolic"):
            raise ConfigError(f"unknown linkage kind {self.kind!r}")
        if self.kind == "hyperbolic" and self.norm_minus is None:
            raise ConfigError("hyperbolic linkage needs norm_minus")

    def linked(self, ell, n, tau=None, sigma=None):
        if ell < 0 or n < 0:
            raise ConfigError("dyadic indices must be >= 0")
        if self.kind == "expanding":
            return 2.0**n <= self.norm_plus * 2.0 ** (ell + 4)
        pair = (tau, sigma)
        if pair == ("+", "+"):
            return 2.0**n <= 2.0 ** (ell + 5) * self.norm_plus
        if pair == ("-", "-"):
            return 2.0 ** (ell - 5) * self.norm_minus <= 2.0**n
        if pair == ("+", "-"):
            return 2.0**n >= 32.0 * self.norm_minus or 2.0**ell >= 32.0 * self.norm_plus
        if pair == ("-", "+"):
            return False
        raise ConfigError(f"cone labels must be '+' or '-', got {pair}")

    @classmethod
    def from_model(cls, model, cones=None):
        """Linkage built from a map's cone norms.

        ``||T||_-`` always uses the single pair ``(Θ_+, Θ_-)``: the
        separation argument behind ``N(T)`` relies on that pair, even when a
        primed pair sharpens the reported norms.
        """
        if model.d == 1:
            return cls(weakest_contraction(model), kind="expanding")
        if cones is None:
            raise ConfigError("hyperbolic linkage needs a cone system")
        single = dataclasses.replace(cones, prime=None)
        return cls(weakest_contraction(model, cones), weakest_expansion(model, single), "hyperbolic")

    def threshold(self, branch, n_max, cones=None, n_points=64):
        """``N(T)``: smallest integer with ``dist >= 2**(max(n, l) - N)`` over non-linked pairs up to ``n_max``.

        Returns ``(N, worst, overlapping)``: ``worst`` is the pair attaining
        ``N`` and ``overlapping`` lists non-linked pairs whose supports touch
        (distance 0).  Such pairs admit no finite ``N``; with cones they are
        the index-0 blocks and the low ``(+,-)`` pairs, all of bounded
        frequency, and they are reported rather than dropped.
        """
        best, worst, overlapping = -math.inf, None, []
        labels = [(None, None)] if cones is None else [(t, s) for t in "+-" for s in "+-"]
        for ell in range(n_max + 1):
            for n in range(n_max + 1):
                for tau, sigma in labels:
                    if self.linked(ell, n, tau, sigma):
                        continue
                    dist, _ = support_distance(branch, ell, n, tau, sigma, cones, n_points=n_points)
                    if dist <= 0:
                        overlapping.append((ell, n, tau, sigma))
                        continue
                    need = math.ceil(max(n, ell) - math.log2(dist))
                    if need > best:
                        best, worst = need, (ell, n, tau, sigma)
        return best, worst, overlapping

    def to_dict(self):
        return {"kind": self.kind, "norm_plus": self.norm_plus, "norm_minus": self.norm_minus}


def _interval_distance(a1, b1, a2, b2):
    return max(0.0, a1 - b2, a2 - b1)


def _psi_support(n):
    return (0.0, 2.0) if n == 0 else (2.0 ** (n - 1), 2.0 ** (n + 1))


def _psi_tilde_support(ell):
    return (0.0, 4.0) if ell == 0 else (2.0 ** (ell - 2), 2.0 ** (ell + 2))


def _sector_arcs(cones, which):
    """Closed angular support on the circle as a list of (center, halfwidth)."""
    if which == "check+":
        c = cones.check_cones()
        return [(c.plus_center, 0.5 * (1 + cones.check_shrink) * cones.plus_halfwidth)]
    if which == "check-":
        c = cones.check_cones()
        return [(c.plus_center + np.pi / 2, np.pi / 2 - cones.check_shrink * cones.plus_halfwidth)]
    if which == "tilde+":  # complement of Θ~_-
        w = cones.tilde_shrink * cones.minus_halfwidth
        return [(cones.minus_center + np.pi / 2, np.pi / 2 - w)]
    if which == "tilde-":  # complement of Θ~_+
        w = cones.tilde_shrink * cones.plus_halfwidth
        return [(cones.plus_center + np.pi / 2, np.pi / 2 - w)]
    raise ValueError(which)


def _sector_samples(arcs, r_lo, r_hi, n_ang=181, n_rad=33):
    pts = []
    for c, w in arcs:
        th = c + np.linspace(-w, w, n_ang)
        th = np.concatenate([th, th + np.pi])
        r = np.linspace(r_lo, r_hi, n_rad) if r_hi > r_lo else np.array([r_lo])
        R, TH = np.meshgrid(r, th, indexing="ij")
        pts.append(np.stack([R * np.cos(TH), R * np.sin(TH)], axis=-1).reshape(-1, 2))
    return np.concatenate(pts)


def _boundary_samples(arcs, r_lo, r_hi, n=257):
    """Boundary of an annular sector (enough for distances between such sets)."""
    pts = []
    for c, w in arcs:
        for sgn in (0.0, np.pi):
            th = c + sgn + np.linspace(-w, w, n)
            for r in (r_lo, r_hi):
                pts.append(np.stack([r * np.cos(th), r * np.sin(th)], axis=-1))
            rr = np.linspace(r_lo, r_hi, n)
            for t in (c + sgn - w, c + sgn + w):
                pts.append(np.stack([rr * np.cos(t), rr * np.sin(t)], axis=-1))
    return np.concatenate(pts)


def _in_sector(points, arcs, r_lo, r_hi):
    r = np.linalg.norm(points, axis=-1)
    th = np.arctan2(points[:, 1], points[:, 0])
    inside = np.zeros(len(points), dtype=bool)
    for c, w in arcs:
        d = np.abs(np.mod(th - c + np.pi / 2, np.pi) - np.pi / 2)
        inside |= d <= w + 1e-12
    return inside & (r >= r_lo - 1e-12) & (r <= r_hi + 1e-12)


def support_distance(branch, ell, n, tau=None, sigma=None, cones=None, n_points=64, region=None):
    """``min_x dist(supp psi_n, DT_x^tr supp psi~_l)`` (anisotropic: ``supp psi^check_{n,sigma}``, ``supp psi~_{l,tau}``).

    Returns ``(distance, x_min)``.
    """
    if cones is None:
        if branch.d != 1:
            raise ConfigError("isotropic support distance is implemented for 1D branches")
        lo, hi = region if region is not None else (0.0, 1.0)
        x = np.linspace(lo, hi, n_points)
        slopes = np.abs(branch.derivative(x))
        a1, b1 = _psi_support(n)
        a2, b2 = _psi_tilde_support(ell)
        d = np.array([_interval_distance(a1, b1, s * a2, s * b2) for s in slopes])
        i = int(np.argmin(d))
        return float(d[i]), float(x[i])
    from .dynamics import _sample_points
    target_arcs = _sector_arcs(cones, "check" + sigma)
    source_arcs = _sector_arcs(cones, "tilde" + tau)
    a1, b1 = _psi_support(n)
    a2, b2 = _psi_tilde_support(ell)
    if n == 0:
        target_arcs = [(0.0, np.pi / 2)]
    if ell == 0:
        source_arcs = [(0.0, np.pi / 2)]
    tgt = _boundary_samples(target_arcs, a1, b1)
    src = _boundary_samples(source_arcs, a2, b2)
    best, where = math.inf, None
    pts = _sample_points(branch, region, n_points)
    for x, J in zip(pts, branch.derivative(pts)):
        img = src @ J  # rows: DT^tr xi
        # overlapping sets have distance zero
        if np.any(_in_sector(img, target_arcs, a1, b1)) or np.any(
                _in_sector(tgt @ np.linalg.inv(J), source_arcs, a2, b2)):
            return 0.0, np.asarray(x).tolist()
        d = _min_pair_distance(tgt, img)
        if d < best:
            best, where = d, np.asarray(x).tolist()
    return float(best), where


def _min_pair_distance(P, Q, chunk=2048):
    best = math.inf
    for s in range(0, len(P), chunk):
        D = np.sqrt(np.sum((P[s:s + chunk, None, :] - Q[None, :, :]) ** 2, axis=-1))
        best = min(best, float(D.min()))
    return best


def local_operator(branch, gamma, u, center=0.5):
    """``(L u)(x) = gamma(x) u(T(x))`` on the grid of ``u``.

    For 1D branches ``x`` ranges over the period cell centred at ``center``
    (``gamma`` should vanish near its edges) and ``u`` is evaluated off-grid
    by trigonometric interpolation.  Toral maps act on the whole torus.
    """
    N = u.N
    if u.d == 1:
        x = np.mod(np.arange(N) / N - (center - 0.5), 1.0) + (center - 0.5)
        gx = np.asarray(gamma(x), dtype=complex)
        vals = np.zeros(N, dtype=complex)
        live = gx != 0
        if np.any(live):
            vals[live] = gx[live] * u.evaluate(branch.evaluate(x[live]))
        return GridFunction(vals)
    X = grid_points(N, 2)
    gx = gamma(X) if callable(gamma) else np.full((N, N), gamma)
    return GridFunction(gx * u.evaluate(branch.evaluate(X).reshape(-1, 2)).reshape(N, N))


@dataclass
class SplitResult:
    L0: GridFunction
    L1: GridFunction
    Lu: GridFunction
    linked_pairs: list
    unlinked_pairs: list
    n_out: int

    @property
    def identity_error(self):
        return float(np.max(np.abs(self.L0.values + self.L1.values - self.Lu.values)))


def split_L0_L1(branch, gamma, u, rel, cones=None, n_in=None, n_out=None, out_N=None):
    """Split ``L u = L'_0 u + L'_1 u`` over linked / non-linked block pairs.

    ``L'_0 u = sum_n sum_{l linked to n} P_n (L u_l)`` and
    ``L'_1 u = sum_n sum_{l not linked} P_n (L psi~_l(D) u_l)``, with ``P_n``
    the block projector ``psi_n(D)`` (``psi^check_{n,sigma}(D)`` with cones).
    Blocks run up to the grid's cover index so the identity is exact on the
    grid.  ``out_N`` (2D) sets a finer output grid for maps that raise
    frequencies.
    """
    if cones is not None and u.d != 2:
        raise ConfigError("anisotropic splitting needs a 2D grid function")
    n_in = cover_index(u) if n_in is None else n_in
    dec = dyadic_blocks(u, cones=cones, n_max=n_in, warn=False)
    if u.d == 2 and out_N is not None and out_N != u.N:
        u_up = _resample(u, out_N)
        blocks = {key: _resample(b, out_N) for key, b in dec.blocks.items()}
    else:
        u_up, blocks = u, dec.blocks
    Lu = local_operator(branch, gamma, u_up)
    n_out = cover_index(Lu) if n_out is None else n_out
    fhat = {key: np.fft.fftn(local_operator(branch, gamma, _tilde_project(b, key, cones)).values)
            for key, b in blocks.items()}
    zero = np.zeros_like(Lu.values)
    L0, L1 = zero.copy(), zero.copy()
    linked, unlinked = [], []
    for n in range(n_out + 1):
        sig_list = [None] if cones is None else ["+", "-"]
        for sigma in sig_list:
            P = block_symbol(Lu, n, sigma, cones, family="psi" if cones is None else "check")
            for key, fh in fhat.items():
                ell, tau = (key, None) if cones is None else key
                part = np.fft.ifftn(P * fh)
                if rel.linked(ell, n, tau, sigma):
                    L0 += part
                    linked.append((ell, tau, n, sigma))
                else:
                    L1 += part
                    unlinked.append((ell, tau, n, sigma))
    return SplitResult(GridFunction(L0), GridFunction(L1), Lu, linked, unlinked, n_out)


def _tilde_project(b, key, cones):
    # psi~_l(D) u_l = u_l exactly, but apply it so the code path matches the definition
    if cones is None:
        sym = block_symbol(b, key, family="tilde")
    else:
        sym = block_symbol(b, key[0], key[1], cones, family="tilde")
    return GridFunction(np.fft.ifftn(np.fft.fftn(b.values) * sym))


def _resample(u, N):
    """Zero-pad the spectrum of ``u`` onto a finer ``N`` grid (exact for the trig interpolant)."""
    view = u.frequency_view()
    pad = (N - u.N) // 2
    big = np.pad(view, [(pad, pad)] * u.d)
    # frequency_view has N+1 entries per axis; the padded one has N+1 as well
    return GridFunction.from_frequency_view(big)


def lacunary_samples(p, N=1024, n_lo=5, n_hi=8, count=10):
    """Block-saturating test functions for the ``C^p_*`` ratio.

    Sample ``j`` is ``sum_n 2^{-p(n+t)} cos(2 pi round(2^{n+t}) x)`` with
    ``t = j / count``: every band between ``n_lo`` and ``n_hi`` carries the
    same weighted mass, so ``||u||_{C^p_*}`` is attained in every band and the
    worst case of the upper bound is exercised.  The fractional shifts ``t``
    average out where individual frequencies fall relative to the partition.
    """
    out = []
    for j in range(count):
        t = j / count
        freqs = [(2.0 ** (-p * (n + t)), round(2.0 ** (n + t))) for n in range(n_lo, n_hi + 1)]
        if max(k for _, k in freqs) >= N // 2:
            raise ConfigError(f"band n_hi={n_hi} does not fit on an N={N} grid")
        out.append(GridFunction.from_callable(
            lambda x, fr=freqs: sum(a * np.cos(2 * np.pi * k * x) for a, k in fr), N))
    return out


def measure_L0_bound(contractions, gamma, p, samples, N=None, gamma_sup=None):
    """Fit ``||L'_0 u||_{C^p_*} / (||gamma||_inf ||u||_{C^p_*})`` against ``||T||_+``.

    ``contractions`` are slopes ``c`` of linear branches ``w -> c w`` (so
    ``||T||_+ = c``).  Returns ``(ratios, slope, intercept)`` where
    ``ratios[i]`` is the max over samples for ``contractions[i]`` and
    ``slope`` the least-squares slope of log ratio against log c.
    """
    contractions = [float(c) for c in contractions]
    if len(set(contractions)) < 3:
        raise ConfigError("need at least 3 distinct contraction factors")
    if len(samples) < 10:
        raise ConfigError("need at least 10 sample functions")
    xs = np.linspace(0, 1, 4097)
    gsup = float(np.max(np.abs(gamma(xs)))) if gamma_sup is None else gamma_sup
    ratios = []
    for c in contractions:
        branch = LocalBranch(c, 0.0)
        rel = LinkageRelation(c)
        best = 0.0
        if gsup > 0:
            for u in samples:
                res = split_L0_L1(branch, gamma, u, rel)
                num = holder_norm_star(res.L0, p, n_max=res.n_out)
                den = gsup * holder_norm_star(u, p, n_max=cover_index(u))
                best = max(best, num / den)
        ratios.append(best)
    if min(ratios) <= 0:
        return ratios, 0.0 if max(ratios) == 0 else math.nan, -math.inf
    lx, ly = np.log(contractions), np.log(ratios)
    if np.ptp(lx) == 0:
        raise NumericalError("degenerate regression")
    slope, intercept = np.polyfit(lx, ly, 1)
    return ratios, float(slope), float(intercept)
