"""Command-line entry point: ``inac-sim run|validate|tle-info``."""
from __future__ import annotations

import argparse
import collections
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .constants import WGS84_A, orbit_class
from .errors import ConfigError, InacError, SemanticError
from .output import emit_csv, emit_plot_script
from .scenario import load_config, run_scenario
from .tle import catalog_hash, scan_tle_file

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("inac_sim")


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    changes = {}
    if args.seed is not None:
        if args.seed < 0:
            raise SemanticError("--seed must be non-negative")
        changes["rng_seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.out is not None:
        changes["output_path"] = args.out
    if changes:
        cfg = cfg.with_overrides(**changes)
    result = run_scenario(cfg)
    path = emit_csv(result.rows, result.metadata, cfg.output_path,
                    result.metric_names, reproducible=args.reproducible)
    log.info("wrote %s (%d rows)", path, len(result.rows))
    if args.emit_plot:
        script = emit_plot_script(path, cfg.scenario_kind)
        log.info("wrote %s", script)
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(json.dumps(cfg.as_document(), indent=2, sort_keys=True))
    if cfg.defaults_applied:
        print("defaults applied: " + ", ".join(cfg.defaults_applied), file=sys.stderr)
    return EXIT_OK


def _cmd_tle_info(args) -> int:
    path = Path(args.path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        print(f"error: no such file: {path}", file=sys.stderr)
        return EXIT_CONFIG
    records, errors = scan_tle_file(text)
    classes = collections.Counter(
        orbit_class((r.semi_major_axis - WGS84_A) / 1e3) for r in records)
    print(f"file: {path}")
    print(f"sha256: {catalog_hash(text)}")
    print(f"records: {len(records)}")
    print(f"rejected: {len(errors)}")
    if records:
        epochs = sorted(r.epoch_utc for r in records)
        print(f"epochs: {epochs[0].isoformat()} .. {epochs[-1].isoformat()}")
        for name, count in sorted(classes.items()):
            print(f"  {name}: {count}")
    for err in errors[:args.max_errors]:
        print(f"  {err}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inac-sim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write its CSV")
    run.add_argument("--config", required=True, help="JSON scenario config")
    run.add_argument("--seed", type=int, help="override rng_seed")
    run.add_argument("--trials", type=int, help="override the Monte Carlo trial count")
    run.add_argument("--out", help="override output_path")
    run.add_argument("--reproducible", action="store_true",
                     help="omit the timestamp so reruns are byte-identical")
    run.add_argument("--emit-plot", action="store_true", help="also write a gnuplot script")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="check a config and print it fully defaulted")
    val.add_argument("--config", required=True)
    val.set_defaults(func=_cmd_validate)

    info = sub.add_parser("tle-info", help="summarize a TLE catalog")
    info.add_argument("path")
    info.add_argument("--max-errors", type=int, default=10, help="rejected records to list")
    info.set_defaults(func=_cmd_tle_info)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InacError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
