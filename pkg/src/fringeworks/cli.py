"""Command-line front end.

Exit status: 0 on success, 1 for invalid input (bad arguments, bad config,
existing output without ``--force``), 2 for failures while running.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, selftest
from .config import FORMATS, ConfigError, load_config
from .experiment import Scenario, gamma_sweep, run_afshar, run_scenario
from .output import emit_profile, emit_report, emit_sweep

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

# Profiles written by ``afshar`` come from the Afshar arrangement itself:
# both slits, no marker, wires in.
PROFILE_SCENARIO = Scenario("both", True)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _formats(text):
    names = tuple(part.strip() for part in text.split(",") if part.strip())
    bad = [n for n in names if n not in FORMATS]
    if not names or bad:
        raise argparse.ArgumentTypeError(f"formats must be drawn from {','.join(FORMATS)}")
    return names


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser():
    parser = _Parser(prog="fringeworks", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="{pattern,afshar,sweep,selftest}")
    sub.required = True

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", default="default", help="config file, or 'default'")
        p.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
        p.add_argument("--format", type=_formats, help="comma-separated subset of csv,json")
        p.add_argument("--force", action="store_true", help="write into a non-empty output directory")
        return p

    add("pattern", "write the two-slit intensity at the wire plane")
    add("afshar", "run all eight scenarios and write the report")
    sweep = add("sweep", "visibility and distinguishability against |gamma|")
    sweep.add_argument("--gamma-steps", type=_positive_int, default=11)
    sub.add_parser("selftest", help="check the model invariants")
    return parser


def _prepare_output(out_dir: Path, force: bool):
    if out_dir.exists() and not out_dir.is_dir():
        raise ConfigError(f"output path {out_dir} exists and is not a directory")
    if out_dir.is_dir() and any(out_dir.iterdir()) and not force:
        raise ConfigError(f"output directory {out_dir} is not empty; use --force to overwrite")
    out_dir.mkdir(parents=True, exist_ok=True)


def _run(args):
    if args.command == "selftest":
        return EXIT_OK if selftest.run() == 0 else EXIT_RUNTIME

    run_config = load_config(args.config)
    out_dir = args.out or run_config.output_dir
    formats = args.format or run_config.formats
    _prepare_output(out_dir, args.force)
    config = run_config.apparatus

    if args.command == "pattern":
        profile = run_scenario(config, Scenario("both", False)).profiles["wires"]
        for fmt in formats:
            print(emit_profile(profile, "wires", out_dir, fmt))
    elif args.command == "afshar":
        report = run_afshar(config)
        for fmt in formats:
            print(emit_report(report, out_dir, fmt))
        profiles = report.results[PROFILE_SCENARIO].profiles
        for plane in run_config.profiles_requested:
            for fmt in formats:
                print(emit_profile(profiles[plane], plane, out_dir, fmt))
    elif args.command == "sweep":
        steps = args.gamma_steps
        gammas = [i / (steps - 1) for i in range(steps)] if steps > 1 else [0.0]
        rows = gamma_sweep(config, gammas)
        for fmt in formats:
            print(emit_sweep(rows, out_dir, fmt))
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    try:
        return _run(args)
    except ConfigError as exc:
        print(f"fringeworks: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:
        print(f"fringeworks: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
