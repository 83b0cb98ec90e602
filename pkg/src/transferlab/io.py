"""Report serialization: RFGF binary grids, canonical JSON, CSV and text tables.

JSON written here is canonical: keys sorted, floats printed with 17
significant digits, complex numbers as ``{"re": .., "im": ..}``, so two runs
with equal values produce byte-identical files.
"""
import csv
import json
import math
import struct
from pathlib import Path

import numpy as np

from ._validation import ConfigError
from .fourier_dyadic import GridFunction

__all__ = [
    "MAGIC",
    "format_float",
    "to_jsonable",
    "dumps",
    "write_json",
    "write_grid",
    "read_grid",
    "grid_to_dict",
    "grid_from_dict",
    "write_operator",
    "write_csv",
    "write_table",
]

MAGIC = b"RFGF"
_HEADER = struct.Struct("<4sII")


def format_float(x):
    """Fixed 17-significant-digit text for a float (round-trips exactly)."""
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    # keep a float marker so readers do not turn 1.0 into an int
    return s if ("e" in s or "." in s) else s + ".0"


def to_jsonable(obj):
    """Convert numpy scalars/arrays, complex numbers and dataclass-like objects."""
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(obj, indent, level, out):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(pad + json.dumps(k) + ": ")
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    else:
        out.append(json.dumps(obj))


def dumps(obj, indent=2):
    """Canonical JSON text (sorted keys, 17-digit floats, trailing newline)."""
    out = []
    _emit(to_jsonable(obj), indent, 0, out)
    return "".join(out) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")


# binary grid format ---------------------------------------------------------

def _write_rfgf(path, values, d, N):
    data = np.asarray(values, dtype=np.complex128)
    inter = np.empty(data.size * 2, dtype="<f8")
    inter[0::2] = data.real.ravel()
    inter[1::2] = data.imag.ravel()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, d, N))
        fh.write(inter.tobytes())


def write_grid(path, u):
    """Write ``u`` as RFGF: magic, u32 dimension, u32 N, then re/im float64 pairs."""
    _write_rfgf(path, u.values, u.d, u.N)


def read_grid(path):
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ConfigError(f"{path}: truncated RFGF header")
    magic, d, N = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ConfigError(f"{path}: not an RFGF file (magic {magic!r})")
    if d not in (1, 2):
        raise ConfigError(f"{path}: unsupported dimension {d}")
    inter = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if inter.size != 2 * N**d:
        raise ConfigError(f"{path}: expected {N**d} values, found {inter.size // 2}")
    values = (inter[0::2] + 1j * inter[1::2]).reshape((N,) * d)
    return GridFunction(values)


def grid_to_dict(u, max_N=64):
    """JSON form for small grids: ``{"d", "N", "re", "im"}``."""
    if u.N > max_N:
        raise ConfigError(f"JSON export is meant for N <= {max_N}; use write_grid")
    return {"d": u.d, "N": u.N, "re": u.values.real.tolist(), "im": u.values.imag.tolist()}


def grid_from_dict(d):
    return GridFunction(np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float))


def write_operator(prefix, op, config_hash=None):
    """``prefix.json`` metadata plus ``prefix.bin`` entries (RFGF, d=2, N=size)."""
    prefix = Path(prefix)
    meta = op.to_dict()
    meta["config_hash"] = config_hash
    meta["entries"] = prefix.with_suffix(".bin").name
    write_json(prefix.with_suffix(".json"), meta)
    _write_rfgf(prefix.with_suffix(".bin"), op.matrix, 2, op.size)


# tables ---------------------------------------------------------------------

def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v).strip('"')
    if isinstance(v, (complex, np.complexfloating)):
        return f"{format_float(v.real)}{'+' if v.imag >= 0 else '-'}{format_float(abs(v.imag))}j"
    return str(v)


def write_csv(path, header, rows, config_hash=None):
    """CSV with a leading ``# config_hash: ...`` comment line."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# config_hash: {config_hash}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])


def write_table(path, header, rows, config_hash=None):
    """Whitespace-aligned text table with ``#`` comment header (gnuplot-ready)."""
    cells = [[_cell(v) or "-" for v in r] for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(header)]
    lines = [f"# config_hash: {config_hash}",
             "# " + "  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines += ["  " + "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
