"""Command-line entry point.

    intricacy <indexed|kmc|pde|front|census|verify> [--config F] [--out DIR] [--seed N] [--plot]

Exit codes: 0 success, 2 configuration error, 3 numerical abort,
4 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from intricacy import config as config_mod
from intricacy import runs, verify
from intricacy.contagion import EventQueueError
from intricacy.evolution import NumericalInstability
from intricacy.fields import SimplexViolation
from intricacy.io import RunManifest
from intricacy.profile import NoCrossing

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4

RUNNERS = {
    "indexed": runs.run_indexed,
    "kmc": runs.run_kmc,
    "pde": runs.run_pde,
    "front": runs.run_front,
    "census": runs.run_census,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="intricacy", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=[*RUNNERS, "verify", "config"],
                    help="experiment to run; 'config' prints the documented defaults")
    ap.add_argument("--config", type=Path, default=None, help="INI file (defaults if omitted)")
    ap.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    ap.add_argument("--seed", type=int, default=None, help="override the gas seed")
    ap.add_argument("--plot", action="store_true", help="also write SVG plots")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "config":
        print(config_mod.documentation())
        return EXIT_OK
    try:
        cfg = config_mod.load(args.config)
    except config_mod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "verify":
        results = verify.run_all()
        return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY

    out = args.out / args.command
    man = RunManifest(command=args.command, config_echo=cfg.echo())
    try:
        if args.command == "kmc":
            status = runs.run_kmc(cfg, out, args.plot, man, seed=args.seed)
        else:
            status = RUNNERS[args.command](cfg, out, args.plot, man)
    except (NumericalInstability, SimplexViolation, EventQueueError, NoCrossing) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    man.write(out)
    print(f"wrote {', '.join(man.outputs)} and manifest.txt to {out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
