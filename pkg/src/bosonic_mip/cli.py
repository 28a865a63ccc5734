"""Command-line experiment harness.

Subcommands: ``run``, ``sweep``, ``oracle``, ``presets list``,
``validate``.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure.  Failures also emit a machine-readable ``error.json`` when an
output directory is available.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigError, NumericError
from .experiment import THREADS_ENV, apply_override, oracle, resolve_config, run, sweep
from .presets import ALIASES, PRESETS, preset, preset_names

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _add_common(parser):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", metavar="PATH", help="JSON experiment config")
    group.add_argument("--preset", metavar="NAME", help="named preset configuration")
    parser.add_argument("--out", metavar="DIR", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help=f"sweep worker count (falls back to ${THREADS_ENV})",
    )
    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted-path config override, e.g. schedule.steps=2001",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosonic-mip",
        description="Adiabatic mixed-integer optimization on simulated bosonic modes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (
        ("run", "run one experiment and write its artifacts"),
        ("sweep", "run a parameter sweep and write summary.csv"),
        ("oracle", "brute-force and spectral cross-check of a problem"),
        ("validate", "validate a config without running it"),
    ):
        p = sub.add_parser(name, help=text)
        _add_common(p)

    p = sub.add_parser("presets", help="inspect shipped presets")
    p.add_argument("action", choices=["list"], help="list preset names")
    return parser


def _load_config(args) -> dict:
    if args.preset:
        cfg = preset(args.preset)
    else:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        # allow pointing --config at a manifest.json for exact reruns
        if "config" in cfg and "version" in cfg:
            cfg = cfg["config"]
    for item in args.override:
        if "=" not in item:
            raise ConfigError(f"override must look like KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        apply_override(cfg, key, value)
    return cfg


def _write_error(outdir, kind, message):
    if not outdir:
        return
    try:
        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "error.json"), "w") as fh:
            json.dump({"error": {"type": kind, "message": message}}, fh, indent=2)
            fh.write("\n")
    except OSError:
        pass


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "presets":
        for name in preset_names():
            notes = PRESETS[name].get("notes", "")
            print(f"{name}: {notes}")
        alias_text = ", ".join(f"{a} -> {t}" for a, t in sorted(ALIASES.items()))
        print(f"aliases: {alias_text}")
        return EXIT_OK

    outdir = args.out
    try:
        cfg = _load_config(args)
        if args.command == "validate":
            resolve_config(cfg)
            print("config ok")
            return EXIT_OK
        if outdir is None:
            raise ConfigError("--out DIR is required for this command")
        if args.command == "run":
            manifest = run(cfg, outdir, seed=args.seed, threads=args.threads)
            print(json.dumps(manifest["metrics"], indent=2))
        elif args.command == "sweep":
            manifest = sweep(cfg, outdir, seed=args.seed, threads=args.threads)
            print(f"wrote {len(manifest['rows'])} sweep rows")
        elif args.command == "oracle":
            report = oracle(cfg, outdir)
            print(json.dumps(report, indent=2, default=str))
        return EXIT_OK
    except ConfigError as exc:
        _write_error(outdir, type(exc).__name__, str(exc))
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        _write_error(outdir, type(exc).__name__, str(exc))
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
