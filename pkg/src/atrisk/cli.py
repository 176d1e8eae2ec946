"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 runtime error. Errors are
reported on stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .config import dump_config, load_config, resolve_subsets
from .errors import AtRiskError, ConfigError

OUTPUT_ENV = "ATRISK_OUTPUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

logger = logging.getLogger("atrisk")


def _output_dir(cfg, override: str | None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env)
    return cfg.resolve_path(cfg.outputs)


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    if args.dump:
        sys.stdout.write(dump_config(cfg))
    else:
        print(f"ok: {len(cfg.pipelines)} pipeline(s), horizons {list(cfg.horizons)}")
    return EXIT_OK


def cmd_subsets(args) -> int:
    cfg = load_config(args.config)
    for name, ids in resolve_subsets(cfg, known_ids=cfg.known_ids()).items():
        print(f"{name} ({len(ids)}): {', '.join(ids)}")
    return EXIT_OK


def cmd_dump_panel(args) -> int:
    from .runner import load_panel, write_panel_csv

    cfg = load_config(args.config)
    panel = load_panel(cfg)
    write_panel_csv(panel, args.out if args.out else sys.stdout)
    return EXIT_OK


def cmd_run(args) -> int:
    from .runner import execute, write_outputs

    cfg = load_config(args.config)
    out = _output_dir(cfg, args.output)
    result = execute(cfg)
    write_outputs(cfg, result, out)
    logger.info("wrote %d run(s) to %s", len(result.runs), out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atrisk", description="Recession forecasting with at-risk indicators.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="tune, backtest and write all reports")
    p.add_argument("config")
    p.add_argument("-o", "--output", help=f"output directory (overrides ${OUTPUT_ENV} and the config)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a config file")
    p.add_argument("config")
    p.add_argument("--dump", action="store_true", help="print the normalised config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("subsets", help="list variable subsets with their members")
    p.add_argument("config")
    p.set_defaults(func=cmd_subsets)

    p = sub.add_parser("dump-panel", help="write the aligned, transformed panel as CSV")
    p.add_argument("config")
    p.add_argument("-o", "--out", help="destination file (default stdout)")
    p.set_defaults(func=cmd_dump_panel)
    return parser


def _report(kind: str, exc: BaseException) -> None:
    print(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}), file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        _report("config", exc)
        return EXIT_CONFIG
    except (AtRiskError, OSError, ValueError, KeyError) as exc:
        _report("runtime", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
