"""Command-line front end.

    stochosc simulate <config-or-preset> [--out DIR] [--seed N]
                      [--threads N] [--dt DT] [--n-traj N]
    stochosc presets
    stochosc validate <config>

Exit codes: 0 success, 1 validation error, 2 runtime error.  The
``--threads`` flag changes wall time only, never any output byte.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import (
    RunManifest,
    apply_overrides,
    format_run_config,
    parse_config,
    preset,
    preset_description,
    preset_names,
)
from .errors import ParameterError, ParseError
from .output import ensure_writable_dir, write_outputs
from .runner import run_manifest

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochosc",
        description="Trajectory-ensemble simulator for a harmonic oscillator "
        "with a stochastically switching frequency.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a config file or preset and write artifacts")
    sim.add_argument("target", help="path to a config document, or a preset name")
    sim.add_argument("--out", help="output directory (default: from the config)")
    sim.add_argument("--seed", type=int, help="override the master seed")
    sim.add_argument("--threads", type=int, default=1, help="worker threads (speed only)")
    sim.add_argument("--dt", type=float, help="override the time step")
    sim.add_argument("--n-traj", type=int, dest="n_traj", help="override the ensemble size")

    sub.add_parser("presets", help="list the available presets")

    val = sub.add_parser("validate", help="parse a config document without running it")
    val.add_argument("target", help="path to a config document")
    return parser


def _load_manifest(target: str) -> RunManifest:
    if target in preset_names():
        return preset(target)
    if not os.path.exists(target):
        raise ParseError(f"no such preset or config file: {target!r}")
    with open(target, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _cmd_simulate(args) -> int:
    try:
        manifest = _load_manifest(args.target)
        manifest = apply_overrides(
            manifest,
            seed=args.seed,
            dt=args.dt,
            n_trajectories=args.n_traj,
            output_dir=args.out,
        )
    except (ParseError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        ensure_writable_dir(manifest.output_dir)
    except OSError as exc:
        print(f"error: output directory not writable: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        results = run_manifest(manifest, n_threads=max(1, args.threads))
        paths = write_outputs(manifest, results)
    except (ArithmeticError, OSError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in paths:
        print(path)
    return EXIT_OK


def _cmd_presets() -> int:
    for name in preset_names():
        print(f"{name:7s} {preset_description(name)}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        with open(args.target, "r", encoding="utf-8") as fh:
            manifest = parse_config(fh.read())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"valid: {len(manifest.runs)} run(s), outputs: {', '.join(manifest.outputs)}")
    for run in manifest.runs:
        print(f"--- run '{run.label}' ---")
        print(format_run_config(manifest, run), end="")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "presets":
        return _cmd_presets()
    return _cmd_validate(args)


if __name__ == "__main__":
    sys.exit(main())
