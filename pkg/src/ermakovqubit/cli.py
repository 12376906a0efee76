"""Command line entry point: ``ermakovqubit {synth,evolve,verify,scan}``."""

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .errors import ErmakovQubitError
from .runner import FAMILIES, RunConfig, UsageError, parse_range, run, scan, write_summary_csv

SUBCOMMAND_OUTPUTS = {
    "synth": ("field", "factorization"),
    "evolve": ("field", "state", "inversion"),
    "verify": ("field", "state", "inversion", "verify"),
}
SCAN_FLAGS = {
    "scan_g_re": "g_re",
    "scan_g_im": "g_im",
    "scan_delta": "delta",
    "scan_Delta": "Delta",
    "scan_omega1": "omega1",
    "scan_kappa": "kappa",
}


def _common(parser):
    parser.add_argument("--config", help="JSON file with RunConfig keys; flags override it")
    parser.add_argument("--family", choices=FAMILIES)
    parser.add_argument("--g-re", type=float, dest="g_re")
    parser.add_argument("--g-im", type=float, dest="g_im")
    parser.add_argument("--delta", type=float, help="detuning δ")
    parser.add_argument("--Delta", type=float, dest="Delta", help="level splitting Δ")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--omega1", type=float, help="prescribed constant frequency Ω1")
    group.add_argument("--kappa", type=float, help="Ω0/Ω1")
    parser.add_argument("--r0-re", type=float, dest="r0_re", help="custom-pinney: Re R(0)")
    parser.add_argument("--r0-im", type=float, dest="r0_im", help="custom-pinney: Im R(0)")
    parser.add_argument("--r0p-re", type=float, dest="r0p_re", help="custom-pinney: Re R'(0)")
    parser.add_argument("--r0p-im", type=float, dest="r0p_im", help="custom-pinney: Im R'(0)")
    parser.add_argument("--c1", type=float, help="custom-pinney: Pinney constant c1")
    parser.add_argument("--c2", type=float, help="custom-pinney: Pinney constant c2")
    parser.add_argument("--t-max", type=float, dest="t_max")
    parser.add_argument("--points", type=int, dest="n_points")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--max-p", type=int, dest="max_p")
    for key in ("propagator", "unitarity", "ermakov", "schrodinger"):
        parser.add_argument(f"--tol-{key}", type=float, dest=f"tol_{key}")
    parser.add_argument("--corrupt-alpha", type=float, dest="corrupt_alpha", help=argparse.SUPPRESS)
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ermakovqubit",
        description="Exactly solvable qubit driving fields from the Ermakov equation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "synth": "write the driving field and factorizing functions",
        "evolve": "write state populations and inversion",
        "verify": "compare closed forms with numerical integration",
        "scan": "summary table over parameter ranges",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        _common(p)
        if name == "scan":
            for flag, key in SCAN_FLAGS.items():
                p.add_argument("--" + flag.replace("_", "-"), dest=flag, metavar="RANGE",
                               help=f"values of {key}: 'a,b,c' or 'start:stop:num'")
            p.add_argument("--jobs", type=int, default=1)
            p.add_argument("--summary", default="scan_summary.csv", help="file name inside --out")
    return parser


def config_from_args(args):
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    names = {f.name for f in fields(RunConfig)}
    updates = {k: v for k, v in vars(args).items() if k in names and v is not None}
    for k, v in updates.items():
        setattr(cfg, k, v)
    if args.omega1 is not None:
        cfg.kappa = None
    if args.kappa is not None:
        cfg.omega1 = None
    th = dict(cfg.thresholds)
    for key in list(th):
        value = getattr(args, f"tol_{key}", None)
        if value is not None:
            th[key] = value
    cfg.thresholds = th
    if args.command in SUBCOMMAND_OUTPUTS:
        cfg.outputs = SUBCOMMAND_OUTPUTS[args.command]
    return cfg


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = config_from_args(args)
        if args.command == "scan":
            ranges = {
                key: parse_range(getattr(args, flag))
                for flag, key in SCAN_FLAGS.items()
                if getattr(args, flag) is not None
            }
            rows = scan(cfg, ranges, jobs=args.jobs)
            path = write_summary_csv(Path(cfg.out) / args.summary, rows)
            print(path)
            return 0
        status, paths = run(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ErmakovQubitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return status


if __name__ == "__main__":
    sys.exit(main())
