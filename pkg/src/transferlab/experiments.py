"""Experiment recipes: resolved config in, results and tables out.

Each recipe returns ``(results, tables)`` where ``results`` is a JSON-ready
dict and ``tables`` maps a file stem to ``(header, rows)``.  Recipes never
touch the file system and never look at the thread count except to pass it
on, so their output does not depend on it.
"""
import math

import numpy as np

from ._validation import ConfigError, NumericalError
from .determinants import (bound_estimate, compare_zeros_eigenvalues, determinant_series,
                           determinant_zeros)
from .dynamics import ExpandingCircleMap, LinearToralMap, LocalBranch, map_from_spec, weight_from_spec
from .fourier_dyadic import (band_limited_corpus, classical_holder_norm, holder_norm_star,
                             kernel_l1_mass, psi_n, top_index)
from .kernel_lab import Amplitude, kernel_bound_check
from .transfer_op import LinkageRelation, resonances

__all__ = ["RECIPES", "run_recipe", "build_model"]


def build_model(cfg):
    """Map, weight and cone system described by a resolved config."""
    model = map_from_spec(cfg["map"])
    g = weight_from_spec(cfg["weight"])
    cones = None
    if isinstance(model, LinearToralMap):
        c = cfg["cones"]
        cones = model.adapted_cones(math.radians(c["narrow_deg"]), math.radians(c["wide_deg"]))
    return model, g, cones


def _pq(cfg):
    return float(cfg["exponents"]["p"]), float(cfg["exponents"]["q"])


def _resonance_report(cfg, model, g, cones, threads):
    p, q = _pq(cfg)
    P = cfg["params"]
    return resonances(model, g, P["N_f"], p, None if isinstance(model, ExpandingCircleMap) else q,
                      cones=cones, refinement=P["refinement"], stability_tol=P["stability_tol"],
                      margin=P["margin"], threads=threads)


def _resonance_rows(report):
    return [(float(np.real(v)), float(np.imag(v)), abs(v), mu, s)
            for v, mu, s in zip(report.eigenvalues, report.multiplicities, report.stability)]


_RES_HEADER = ["re", "im", "modulus", "multiplicity", "stability"]


def _zeros_and_series(cfg, model, g, threads):
    P = cfg["params"]
    series = determinant_series(model, g, P["M"], threads=threads)
    zeros, diag = determinant_zeros(series, agree_tol=P["agree_tol"], cluster_tol=P["cluster_tol"])
    return series, zeros, diag


def _series_tables(series, zeros):
    traces = [(m, complex(t).real, complex(t).imag, complex(a).real, complex(a).imag)
              for m, (t, a) in enumerate(zip(series.traces, series.coefficients[1:]), start=1)]
    zrows = [(z.real, z.imag, abs(z), order) for z, order in zeros]
    return {
        "traces": (["m", "t_re", "t_im", "a_re", "a_im"], traces),
        "zeros": (["re", "im", "modulus", "order"], zrows),
    }


def _series_results(series, zeros, diag):
    return {
        "traces": [complex(t) for t in series.traces],
        "coefficients": [complex(a) for a in series.coefficients],
        "reliability_radius": float(series.reliability_radius),
        "significant_degree": int(series.significant_degree),
        "zeros": [{"z": complex(z), "order": int(o)} for z, o in zeros],
        "zeros_diagnostic": diag,
    }


# recipes --------------------------------------------------------------------

def run_norms(cfg, threads=None):
    P = cfg["params"]
    corpus = band_limited_corpus(P["N"], P["corpus_size"], cfg["seed"])
    rows, ratios = [], {}
    for p in P["p_list"]:
        for i, u in enumerate(corpus):
            c = classical_holder_norm(u, p, P["radius"])
            d = holder_norm_star(u, p)
            rows.append((i, p, c, d, c / d))
            ratios.setdefault(p, []).append(c / d)
    n_max = top_index(P["N"])
    k = np.abs(np.fft.fftfreq(P["N"], 1.0 / P["N"]))
    psi = np.array([psi_n(n, k) for n in range(n_max + 1)])
    low = k <= 2.0 ** (n_max - 1)
    pou = float(np.max(np.abs(psi[:, low].sum(axis=0) - 1.0)))
    support = 0
    for n in range(1, n_max + 1):
        outside = (k < 2.0 ** (n - 1)) | (k > 2.0 ** (n + 1))
        support += int(np.count_nonzero(psi[n, outside]))
    ortho = max((float(np.max(np.abs(psi[m] * psi[n]))) for m in range(n_max + 1)
                 for n in range(n_max + 1) if abs(m - n) >= 5), default=0.0)
    mass = [kernel_l1_mass(P["N"], n) for n in range(n_max + 1)]
    results = {
        "ratio_range": {str(p): [min(r), max(r)] for p, r in ratios.items()},
        "max_ratio_spread": max(max(max(r), 1.0 / min(r)) for r in ratios.values()),
        "partition_of_unity_error": pou,
        "support_violations": support,
        "orthogonality_max": ortho,
        "l1_mass": mass,
        "l1_mass_ratio": max(mass) / min(mass),
    }
    return results, {"norm_ratios": (["function", "p", "classical", "dyadic", "ratio"], rows)}


def run_resonances(cfg, threads=None):
    model, g, cones = build_model(cfg)
    rep = _resonance_report(cfg, model, g, cones, threads)
    return {"resonances": rep.to_dict()}, {"resonances": (_RES_HEADER, _resonance_rows(rep))}


def run_determinant(cfg, threads=None):
    model, g, cones = build_model(cfg)
    series, zeros, diag = _zeros_and_series(cfg, model, g, threads)
    results = _series_results(series, zeros, diag)
    tables = _series_tables(series, zeros)
    if cfg["params"]["resonances"]:
        rep = _resonance_report(cfg, model, g, cones, threads)
        results["resonances"] = rep.to_dict()
        tables["resonances"] = (_RES_HEADER, _resonance_rows(rep))
    return results, tables


def run_bounds(cfg, threads=None):
    model, g, _ = build_model(cfg)
    if model.d != 2:
        raise ConfigError("bounds experiments need a toral map")
    p, q = _pq(cfg)
    P = cfg["params"]
    ts = [math.inf if t == "inf" else float(t) for t in P["t_list"]]
    est = bound_estimate(model, g, p, q, P["m_list"], ts, P["n_quad"], P["n_pre"])
    if not np.isfinite(est.rho):
        raise NumericalError("rho^{p,q} sequence is not finite")
    monotone = {k: float(est.rho - v) for k, v in est.R.items()}
    results = {"bounds": est.to_dict(), "rho_minus_R": {str(k): v for k, v in monotone.items()},
               "monotone": all(v <= 1e-6 for v in monotone.values())}
    rows = [(m, r) for m, r in zip(est.ms, est.rho_roots)]
    return results, {"rho_roots": (["m", "rho_root"], rows),
                     "R": (["t", "R"], [(str(k), v) for k, v in est.R.items()])}


def run_kernel_check(cfg, threads=None):
    br = LocalBranch(cfg["branch"]["slope"], cfg["branch"]["amplitude"])
    gamma = Amplitude(**cfg["amplitude"])
    rel = LinkageRelation.from_model(br)
    P = cfg["params"]
    rep = kernel_bound_check(br, gamma, rel, n_max=P["n_max"], envelope=P["envelope"], r_test=P["r_test"],
                             slope_from=P["slope_from"], threads=threads, resolution=P["resolution"],
                             rtol=P["rtol"])
    bar = -(rep.r_test - 1.0) * math.log(2.0) + 0.1
    results = {"kernel": rep.to_dict(), "linkage": rel.to_dict(), "slope_bar": bar,
               "slope_ok": bool(rep.slope <= bar)}
    header = ["n", "ell", "sigma", "tau", "sup_abs_V", "envelope_const", "slope_window"]
    return results, {"kernel_pairs": (header, rep.rows())}


def run_zero_eigen_compare(cfg, threads=None):
    model, g, cones = build_model(cfg)
    series, zeros, diag = _zeros_and_series(cfg, model, g, threads)
    rep = _resonance_report(cfg, model, g, cones, threads)
    table = compare_zeros_eigenvalues(rep, zeros, series.reliability_radius, tol=cfg["params"]["tol"])
    results = _series_results(series, zeros, diag)
    results["resonances"] = rep.to_dict()
    results["matching"] = {"perfect": table.perfect, "max_distance": table.max_distance,
                           "radius": table.radius, "pairs": [list(p) for p in table.pairs],
                           "unmatched_zeros": table.unmatched_zeros,
                           "unmatched_resonances": table.unmatched_resonances}
    tables = _series_tables(series, zeros)
    tables["resonances"] = (_RES_HEADER, _resonance_rows(rep))
    tables["matching"] = (["status", "inv_zero", "resonance", "distance"], table.rows())
    return results, tables


RECIPES = {
    "norms": run_norms,
    "resonances": run_resonances,
    "determinant": run_determinant,
    "bounds": run_bounds,
    "kernel-check": run_kernel_check,
    "zero-eigen-compare": run_zero_eigen_compare,
}


def run_recipe(cfg, threads=None):
    return RECIPES[cfg["kind"]](cfg, threads)
