"""Experiment configs: the defaults table, per-kind schemas, loading and hashing.

A config is a TOML (or JSON) document::

    kind = "determinant"
    seed = 0

    [map]
    kind = "expanding-circle"
    k = 2
    eps = 0.0

    [weight]
    kind = "constant"
    value = 0.5

    [exponents]
    p = 1.0
    q = -1.0

    [params]
    M = 14

Missing entries are filled from :data:`DEFAULTS`; the resolved document is
validated against the schema of its kind and hashed (SHA-256 of its
canonical JSON).  The output directory and thread count are not part of the
resolved config, so they never change the hash.
"""
import copy
import hashlib
import json
from pathlib import Path

import jsonschema
import tomli

from ._validation import ConfigError
from .io import dumps

__all__ = [
    "KINDS",
    "DEFAULTS",
    "schema",
    "load_config",
    "resolve_config",
    "validate_config",
    "config_hash",
]

KINDS = {
    "norms": "dyadic vs classical Hölder norms and multiplier invariants on a test corpus",
    "resonances": "refinement-stable transfer-operator eigenvalues above the essential-radius filter",
    "determinant": "periodic-orbit traces, determinant coefficients, certified zeros and resonances",
    "bounds": "rho^{p,q} Birkhoff-sup sequence and R^{p,q,t} bounds with the Cauchy diagnostic",
    "kernel-check": "kernel V_n^l decay sweep over non-linked dyadic pairs for a local branch",
    "zero-eigen-compare": "match reciprocal determinant zeros with accepted resonances",
}

# The single table of defaults.  ``common`` applies to every kind; the entry
# for a kind supplies its ``params`` (and any map/weight the kind needs).
DEFAULTS = {
    "common": {
        "seed": 0,
        "exponents": {"p": 1.0, "q": -1.0},
        "cones": {"narrow_deg": 8.0, "wide_deg": 80.0},
    },
    "norms": {
        "params": {"N": 256, "corpus_size": 20, "p_list": [0.3, 0.5, 0.7], "radius": 0.25},
    },
    "resonances": {
        "map": {"kind": "expanding-circle", "k": 2, "eps": 0.0},
        "weight": {"kind": "constant", "value": 1.0},
        "params": {"N_f": 64, "refinement": 2, "stability_tol": 1e-6, "margin": 0.05},
    },
    "determinant": {
        "map": {"kind": "expanding-circle", "k": 2, "eps": 0.0},
        "weight": {"kind": "constant", "value": 1.0},
        "params": {"M": 14, "agree_tol": 1e-8, "cluster_tol": 1e-6, "resonances": True,
                   "N_f": 64, "refinement": 2, "stability_tol": 1e-6, "margin": 0.05},
    },
    "bounds": {
        "map": {"kind": "linear-toral", "matrix": [[2, 1], [1, 1]]},
        "weight": {"kind": "constant", "value": 1.0},
        "params": {"m_list": [1, 2, 3, 4, 5, 6, 7, 8], "t_list": [2.0, 4.0, "inf"], "n_quad": 256,
                   "n_pre": 30},
    },
    "kernel-check": {
        "branch": {"slope": 0.5, "amplitude": 0.01},
        "amplitude": {"kind": "bspline", "order": 4, "center": 0.0, "radius": 0.5},
        "params": {"n_max": 9, "envelope": "appendix", "r_test": 3.0, "slope_from": 4,
                   "resolution": 16, "rtol": 1e-6},
    },
    "zero-eigen-compare": {
        "map": {"kind": "expanding-circle", "k": 2, "eps": 0.02},
        "weight": {"kind": "inverse-jacobian"},
        "exponents": {"p": 10.0, "q": -1.0},
        "params": {"M": 14, "N_f": 128, "refinement": 2, "stability_tol": 1e-6, "margin": 0.05,
                   "tol": 1e-5, "agree_tol": 1e-8, "cluster_tol": 1e-6},
    },
}

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_INT1 = {"type": "integer", "minimum": 1}

_MAP = {
    "type": "object",
    "required": ["kind"],
    "oneOf": [
        {"properties": {"kind": {"const": "expanding-circle"}, "k": {"type": "integer", "minimum": 2},
                        "eps": _NUM, "r": {}},
         "additionalProperties": False},
        {"properties": {"kind": {"enum": ["linear-toral"]},
                        "matrix": {"type": "array", "minItems": 2, "maxItems": 2,
                                   "items": {"type": "array", "minItems": 2, "maxItems": 2,
                                             "items": {"type": "integer"}}},
                        "r": {}},
         "additionalProperties": False},
        {"properties": {"kind": {"const": "perturbed-toral"},
                        "matrix": {"type": "array", "minItems": 2, "maxItems": 2,
                                   "items": {"type": "array", "minItems": 2, "maxItems": 2,
                                             "items": {"type": "integer"}}},
                        "delta": _NUM, "r": {}},
         "additionalProperties": False},
    ],
}

_TERM = {"type": "object", "required": ["k"],
         "properties": {"k": {}, "a": _NUM, "b": _NUM}, "additionalProperties": False}
_WEIGHT = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["constant", "trig", "inverse-jacobian", "inverse-unstable-jacobian"]},
        "value": _NUM,
        "terms": {"type": "array", "items": _TERM},
    },
    "additionalProperties": False,
}
_EXPONENTS = {"type": "object", "properties": {"p": _NUM, "q": _NUM}, "additionalProperties": False}
_CONES = {"type": "object",
          "properties": {"narrow_deg": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 90},
                         "wide_deg": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 90}},
          "additionalProperties": False}
_SPECTRAL = {"N_f": _INT1, "refinement": {"type": "integer", "minimum": 2}, "stability_tol": _POS,
             "margin": {"type": "number", "minimum": 0}}
_ZEROS = {"M": _INT1, "agree_tol": _POS, "cluster_tol": _POS}

_PARAMS = {
    "norms": {"N": {"type": "integer", "minimum": 16}, "corpus_size": {"type": "integer", "minimum": 1,
                                                                        "maximum": 20},
              "p_list": {"type": "array", "minItems": 1,
                         "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}},
              "radius": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5}},
    "resonances": _SPECTRAL,
    "determinant": {**_ZEROS, **_SPECTRAL, "resonances": {"type": "boolean"}},
    "bounds": {"m_list": {"type": "array", "minItems": 2, "items": _INT1},
               "t_list": {"type": "array", "items": {"anyOf": [{"type": "number", "exclusiveMinimum": 1},
                                                               {"const": "inf"}]}},
               "n_quad": {"type": "integer", "minimum": 8}, "n_pre": {"type": "integer", "minimum": 1}},
    "kernel-check": {"n_max": {"type": "integer", "minimum": 1, "maximum": 9},
                     "envelope": {"enum": ["kernel", "appendix"]}, "r_test": {"type": "number", "minimum": 1},
                     "slope_from": {"type": "integer", "minimum": 0},
                     "resolution": {"type": "integer", "minimum": 16}, "rtol": _POS},
    "zero-eigen-compare": {**_ZEROS, **_SPECTRAL, "tol": _POS},
}

_BRANCH = {"type": "object", "properties": {"slope": _NUM, "amplitude": _NUM},
           "additionalProperties": False}
_AMPLITUDE = {"type": "object", "properties": {
    "kind": {"enum": ["bump", "bspline", "constant", "zero"]}, "order": {"type": "integer", "minimum": 1},
    "center": _NUM, "radius": _POS, "value": _NUM}, "additionalProperties": False}


def schema(kind):
    """JSON schema (draft 7) of a resolved config of the given kind."""
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}; expected one of {sorted(KINDS)}")
    props = {
        "kind": {"const": kind},
        "seed": {"type": "integer", "minimum": 0},
        "exponents": _EXPONENTS,
        "cones": _CONES,
        "params": {"type": "object", "properties": _PARAMS[kind], "additionalProperties": False},
    }
    required = ["kind", "seed", "params"]
    if kind in ("resonances", "determinant", "bounds", "zero-eigen-compare"):
        props.update(map=_MAP, weight=_WEIGHT)
        required += ["map", "weight"]
    if kind == "kernel-check":
        props.update(branch=_BRANCH, amplitude=_AMPLITUDE)
        required += ["branch", "amplitude"]
    return {
        "$schema": "http://json-schema.org/draft-07/schema#",
        "title": f"transferlab {kind} experiment",
        "type": "object",
        "required": required,
        "properties": props,
        "additionalProperties": False,
    }


def load_config(path):
    """Parse a TOML or JSON file into a plain dict."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            return json.loads(raw.decode("utf-8"))
        return tomli.loads(raw.decode("utf-8"))
    except (tomli.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc


def _merge(base, extra):
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "map" and k != "weight":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve_config(raw, seed=None):
    """Fill defaults, apply a seed override and validate; returns a new dict.

    A user-supplied ``map`` or ``weight`` table replaces the default one as a
    whole (a different map kind shares no parameters with the default).
    """
    if not isinstance(raw, dict):
        raise ConfigError("config must be a table")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}; expected one of {sorted(KINDS)}")
    out = _merge(DEFAULTS["common"], DEFAULTS[kind])
    out = _merge(out, raw)
    if seed is not None:
        out["seed"] = int(seed)
    validate_config(out)
    return out


def validate_config(cfg):
    kind = cfg.get("kind") if isinstance(cfg, dict) else None
    validator = jsonschema.Draft7Validator(schema(kind))
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {e.message}")
    return cfg


def config_hash(cfg):
    """SHA-256 of the canonical JSON of a resolved config."""
    return hashlib.sha256(dumps(cfg).encode("utf-8")).hexdigest()
