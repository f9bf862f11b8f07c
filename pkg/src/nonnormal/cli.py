"""Command-line experiment runner.

Exit codes: 0 success, 1 hard assertion failure, 2 config error,
3 numerical-backend failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy

from . import __version__
from .config import EXPERIMENTS, PRESETS, SCHEMA, ConfigError, config_hash, load_config, resolve, tolerances_from_config
from .experiments import Outcome, run
from .linalg import NumericalBackendError
from .plotting import scatter_svg

log = logging.getLogger("nonnormal")

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_BACKEND = 0, 1, 2, 3


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else str(v)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def write_eigenvalues_csv(series: dict[str, np.ndarray], path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "re", "im", "series"])
        for name, pts in series.items():
            for i, z in enumerate(np.asarray(pts, dtype=np.complex128)):
                w.writerow([i, f"{z.real:.17g}", f"{z.imag:.17g}", name])


def write_table_csv(rows: list[dict], path: Path) -> None:
    if not rows:
        return
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in r.items()})


def _emit(outcome: Outcome, out_dir: Path, title: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    if outcome.series:
        write_eigenvalues_csv(outcome.series, out_dir / "eigenvalues.csv")
        scatter_svg(outcome.series, out_dir / "scatter.svg", title)
    for name, rows in outcome.tables.items():
        write_table_csv(rows, out_dir / f"{name}.csv")
    for name, panel in outcome.panels.items():
        _emit(panel, out_dir / name, name)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON or YAML experiment config")
    common.add_argument("--preset", help="start from a named preset")
    common.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--paper-scale", action="store_true", help="use full-size n from the presets")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for independent trials")
    common.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply every tolerance")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="nonnormal", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common], help=f"run the {name} experiment")
    sub.add_parser("presets", help="list the named presets as JSON")
    sub.add_parser("schema", help="print the config JSON schema")
    return p


def execute(args: argparse.Namespace) -> int:
    user = load_config(args.config) if args.config else {}
    if args.preset:
        user["preset"] = args.preset
    if args.seed is not None and not 0 <= args.seed < 2**64:
        raise ConfigError("--seed must be an unsigned 64-bit integer")
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    if not args.tolerance_scale > 0:
        raise ConfigError("--tolerance-scale must be positive")
    cfg = resolve(args.command, user, seed=args.seed, paper_scale=args.paper_scale)
    tol = tolerances_from_config(cfg, args.tolerance_scale)
    digest = config_hash({**cfg, "tolerance_scale": args.tolerance_scale})
    outcome = run(cfg, tol, args.jobs)
    _emit(outcome, args.out, cfg.get("preset", args.command))
    summary = {
        "experiment": args.command,
        "seed": cfg["seed"],
        "config_hash": digest,
        "config": cfg,
        "tolerance_scale": args.tolerance_scale,
        "versions": {"nonnormal": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        "violations": outcome.violations,
        "metrics": outcome.metrics,
    }
    (args.out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    if outcome.violations:
        log.error("%d hard assertion failure(s); see %s", outcome.violations, args.out / "summary.json")
        return EXIT_ASSERT
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "presets":
        print(json.dumps(PRESETS, indent=2, sort_keys=True))
        return EXIT_OK
    if args.command == "schema":
        print(json.dumps(SCHEMA, indent=2))
        return EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return execute(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalBackendError as exc:
        print(f"numerical backend failure: {exc}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
