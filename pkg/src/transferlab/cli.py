"""Command line runner: ``transferlab run | list | schema``.

Exit status: 0 on success, 2 on a validation failure (bad config, unknown
kind, violated map condition), 3 on a numerical failure.
"""
import argparse
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from ._parallel import ENV_THREADS, default_threads
from ._validation import ConfigError, NumericalError
from .config import KINDS, config_hash, load_config, resolve_config, schema
from .experiments import run_recipe
from .io import write_csv, write_json, write_table

__all__ = ["EXIT_OK", "EXIT_VALIDATION", "EXIT_NUMERICAL", "list_experiments", "emit_schema",
           "run", "main"]

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def list_experiments():
    """``[(kind, one-line doc)]`` in a fixed order."""
    return [(k, KINDS[k]) for k in sorted(KINDS)]


def emit_schema(kind):
    """Schema document for ``kind``; raises :class:`ConfigError` for unknown kinds."""
    return schema(kind)


def run(config, out_dir, seed=None, threads=None):
    """Resolve ``config`` (path or dict), run it and write the reports.

    Returns the summary dict.  Files written to ``out_dir``: ``summary.json``
    (resolved config, hash, results), one CSV and one text table per result
    table, and ``run_info.json`` (thread count, timing, versions).  Only
    ``run_info.json`` depends on the thread count or the clock.
    """
    raw = load_config(config) if isinstance(config, (str, Path)) else config
    cfg = resolve_config(raw, seed=seed)
    h = config_hash(cfg)
    threads = default_threads() if threads is None else max(1, int(threads))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    # BLAS stays single-threaded so results do not depend on the thread count
    with threadpool_limits(limits=1), np.errstate(all="ignore"):
        results, tables = run_recipe(cfg, threads)
    elapsed = time.perf_counter() - t0
    files = []
    for stem in sorted(tables):
        header, rows = tables[stem]
        write_csv(out / f"{stem}.csv", header, rows, h)
        write_table(out / f"{stem}.txt", header, rows, h)
        files += [f"{stem}.csv", f"{stem}.txt"]
    summary = {"kind": cfg["kind"], "config": cfg, "config_hash": h, "results": results,
               "files": files, "version": __version__}
    write_json(out / "summary.json", summary)
    write_json(out / "run_info.json", {
        "config_hash": h, "threads": threads, "elapsed_seconds": elapsed,
        "python": platform.python_version(), "numpy": np.__version__, "version": __version__})
    return summary


def _parser():
    ap = argparse.ArgumentParser(prog="transferlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one experiment config")
    r.add_argument("--config", required=True, help="TOML or JSON experiment config")
    r.add_argument("--out", default="transferlab-out", help="output directory")
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: ${ENV_THREADS} or the CPU count)")
    sub.add_parser("list", help="list experiment kinds")
    s = sub.add_parser("schema", help="print the JSON schema of an experiment kind")
    s.add_argument("kind")
    s.add_argument("--out", default=None, help="write the schema to this file")
    return ap


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "list":
            rows = list_experiments()
            width = max(len(k) for k, _ in rows)
            for k, doc in rows:
                print(f"{k.ljust(width)}  {doc}")
            return EXIT_OK
        if args.command == "schema":
            text = json.dumps(emit_schema(args.kind), indent=2, sort_keys=True) + "\n"
            if args.out:
                Path(args.out).write_text(text, encoding="utf-8")
            else:
                sys.stdout.write(text)
            return EXIT_OK
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be >= 1")
            os.environ[ENV_THREADS] = str(args.threads)
        summary = run(args.config, args.out, seed=args.seed, threads=args.threads)
        print(f"{summary['kind']}: wrote {args.out}/summary.json (config {summary['config_hash'][:12]})")
        return EXIT_OK
    except ConfigError as exc:
        print(f"transferlab: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError, OverflowError) as exc:
        print(f"transferlab: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
