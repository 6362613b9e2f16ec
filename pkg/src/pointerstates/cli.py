"""Command line entry point: ``pointerstates <kind> --config run.json``."""

from __future__ import annotations

import argparse
import sys

from .errors import BranchAmbiguity, NumericRegimeError, PointerStateError
from .experiments import KINDS, load_config, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pointerstates", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--seed", type=_u64, help="seed overriding every seed in the config")
        p.add_argument("--workers", type=_positive, default=1, help="parallel worker processes")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed_override=args.seed)
        if cfg.kind != args.command:
            print(
                f"error: config kind is {cfg.kind!r} but subcommand is {args.command!r}",
                file=sys.stderr,
            )
            return EXIT_CONFIG
        paths = run_experiment(cfg, args.out, args.workers)
    except BranchAmbiguity as e:
        print(f"error: {e} (hint: {e.hint})", file=sys.stderr)
        return EXIT_NUMERIC
    except NumericRegimeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except PointerStateError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
