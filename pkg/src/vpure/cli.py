"""Command-line entry point.

    vpure <recipe> --config cfg.json [--out DIR] [--seed S] [--threads K] [--svg]

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 validation-suite failure.
"""

import argparse
import sys

from .config import (RECIPES, load_config, resolve_threads, validate_config)
from .errors import BackendMismatch, ConfigInvalid, VpureError
from .recipes import run_experiment


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vpure",
        description="virtual-purification experiment recipes (CSV output)")
    parser.add_argument("recipe", choices=RECIPES,
                        help="named experiment recipe to run")
    parser.add_argument("--config", metavar="PATH",
                        help="JSON config file (defaults apply when omitted)")
    parser.add_argument("--out", metavar="DIR", default=".",
                        help="output directory (default: current directory)")
    parser.add_argument("--seed", type=int, metavar="S",
                        help="override the master seed")
    parser.add_argument("--threads", type=int, metavar="K",
                        help="worker threads (default: VPURE_THREADS or cpu count)")
    parser.add_argument("--svg", action="store_true",
                        help="also write SVG line plots")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else {}
        if not isinstance(cfg, dict):
            raise ConfigInvalid("config root must be a JSON object")
        cfg = dict(cfg)
        cfg.setdefault("recipe", args.recipe)
        if cfg["recipe"] != args.recipe:
            raise ConfigInvalid(
                f"recipe: config says {cfg['recipe']!r} but the command line "
                f"says {args.recipe!r}")
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.threads is not None:
            cfg["threads"] = args.threads
        if args.svg:
            cfg["svg"] = True
        cfg = validate_config(cfg)
    except (ConfigInvalid, BackendMismatch) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        summary = run_experiment(cfg, args.out)
    except (ConfigInvalid, BackendMismatch) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except VpureError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3

    for path in summary.get("csv", []):
        print(f"wrote {path}")
    for path in summary.get("svg", []):
        print(f"wrote {path}")
    print(f"{summary['recipe']}: {summary['rows']} rows "
          f"({resolve_threads(cfg)} threads)")
    if summary.get("failures"):
        print(f"validation failures: {summary['failures']}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
