"""``support-lab`` command line."""

from __future__ import annotations

import argparse
import logging
import sys

from .jobs import COMMANDS, EXIT_INPUT, FORMATS, JobError, load_job, run_job


def build_parser():
    ap = argparse.ArgumentParser(prog="support-lab", description="Reduction-mod-p experiments.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="job file (flat TOML)")
    ap.add_argument("--primes-max", type=int, help="prime bound B (overrides primes_max)")
    ap.add_argument("--out", help="report path; a .png figure is written alongside")
    ap.add_argument("--cache", help="order cache file (default: $SUPPORT_LAB_CACHE)")
    ap.add_argument("--threads", type=int, help="worker processes for per-prime work")
    ap.add_argument("--format", choices=FORMATS, help="report format")
    ap.add_argument("--no-figure", action="store_true", help="skip the figure next to --out")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        spec = load_job(args.config)
        if spec.command != args.command:
            raise JobError(f"job file is for {spec.command!r}, not {args.command!r}", key="command")
        overrides = {"primes_max": args.primes_max, "out": args.out, "cache": args.cache,
                     "threads": args.threads, "format": args.format}
        for k, v in overrides.items():
            if v is not None:
                spec.fields[k] = v
        if args.primes_max is not None and args.primes_max < 5:
            raise JobError("--primes-max must be at least 5")
        if args.threads is not None and args.threads < 1:
            raise JobError("--threads must be positive")
    except JobError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run_job(spec, figure=False if args.no_figure else None).status


if __name__ == "__main__":
    sys.exit(main())
