"""Command-line entry point: ``seqdiff <subcommand> ...``.

Exit status is 0 on success, 1 for usage errors (bad flags, invalid
parameters, unknown config keys) and 2 for data errors (unreadable or
malformed input files). Diagnostics go to stderr; results go to files or
stdout.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .core import (DataError, Rng, read_series_csv, read_splits_csv, series_to_csv,
                   split_series, write_splits_csv)
from .dtest import TestConfig, local_test, run_test, write_report_csv
from .eventlabel import (filter_genesis_lysis, interpolate_labels, label_rapid_events,
                         read_intensity_csv, write_labels_csv)
from .synthgen import SyntheticConfig, generate


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _fraction(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number or fraction: {text!r}") from None


def _null(text: str) -> str:
    t = text.lower()
    if t not in ("bootstrap", "mc_bootstrap", "permutation"):
        raise argparse.ArgumentTypeError("null must be 'bootstrap' or 'permutation'")
    return "mc_bootstrap" if t.endswith("bootstrap") else t


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="seqdiff", description="Bootstrap regression two-sample test for labeled sequences.")
    p.add_argument("--version", action="version", version=f"seqdiff {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="generate a synthetic labeled series (CSV t,s,y)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--gamma", type=float, default=0.0)
    s.add_argument("--delta", type=float, default=0.25)
    s.add_argument("--phi", type=float, default=0.0)
    s.add_argument("--phi-prime", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", type=Path, help="output CSV (default: stdout)")

    s = sub.add_parser("split", help="write train/holdout/evaluation index sets")
    s.add_argument("--in", dest="input", type=Path, required=True)
    s.add_argument("--fractions", type=_fraction, nargs=3, default=[1 / 3] * 3,
                   metavar=("T1", "T2", "V"))
    s.add_argument("--interleaved", action="store_true", help="random points instead of blocks (IID data only)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", type=Path, required=True)

    def test_flags(s):
        s.add_argument("--in", dest="input", type=Path, required=True)
        s.add_argument("--splits", type=Path, help="splits CSV (default: contiguous thirds)")
        s.add_argument("--B", type=int, default=200)
        s.add_argument("--bandwidth", type=float)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--report", type=Path)

    s = sub.add_parser("test", help="global test with LPD diagnostics")
    test_flags(s)
    s.add_argument("--null", type=_null, default="mc_bootstrap")
    s.add_argument("--k", type=int, default=4)
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--init", choices=("empirical", "stationary"), default="empirical")
    s.add_argument("--fixed-prior", action="store_true",
                   help="compare replicates against the observed training prior")

    s = sub.add_parser("local-test", help="test the null inside a ball of covariate values")
    test_flags(s)
    s.add_argument("--center", type=float, required=True)
    s.add_argument("--epsilon", type=float, required=True)

    s = sub.add_parser("label-events", help="label rapid intensification/weakening")
    s.add_argument("--in", dest="input", type=Path, required=True)
    s.add_argument("--threshold", type=float, default=25.0)
    s.add_argument("--direction", type=str.lower, choices=("ri", "rw"), default="ri")
    s.add_argument("--fine-steps", type=int, default=1)
    s.add_argument("--genesis-filter", type=float, metavar="KT",
                   help="drop leading/trailing entries below this intensity")
    s.add_argument("--out", type=Path)

    s = sub.add_parser("experiment", help="run a synthetic Monte Carlo study")
    s.add_argument("kind", choices=("validity", "power", "lpd", "local"))
    s.add_argument("--config", type=Path, help="key=value config file")
    s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--B", type=int)
    s.add_argument("--threads", type=int)
    s.add_argument("--no-svg", action="store_true")
    s.add_argument("--out", type=Path, required=True)
    return p


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _load_splits(args, n: int):
    if args.splits is not None:
        return read_splits_csv(args.splits)
    return split_series(n, (1 / 3, 1 / 3, 1 / 3), Rng(args.seed))


def cmd_simulate(args) -> None:
    cfg = SyntheticConfig(n=args.n, gamma=args.gamma, delta=args.delta, phi=args.phi,
                          phi_prime=args.phi_prime, seed=args.seed)
    _emit(series_to_csv(generate(cfg)), args.out)


def cmd_split(args) -> None:
    data = read_series_csv(args.input)
    write_splits_csv(split_series(data, args.fractions, Rng(args.seed), interleaved=args.interleaved),
                     args.out)


def _summary(report) -> None:
    print(f"lambda={float(report.lambda_)!r} p_value={float(report.p_value)!r} "
          f"fallback_count={report.fallback_count} B={report.B}")
    if report.fallback_count:
        print(f"warning: {report.fallback_count} evaluation points had no kernel mass "
              "and were assigned the prior", file=sys.stderr)


def cmd_test(args) -> None:
    data = read_series_csv(args.input)
    splits = _load_splits(args, len(data))
    cfg = TestConfig(null_model=args.null, B=args.B, k=args.k, alpha=args.alpha,
                     bandwidth=args.bandwidth, seed=args.seed, init=args.init,
                     recompute_prior=not args.fixed_prior)
    report = run_test(data, splits, cfg)
    if args.report:
        write_report_csv(report, args.report)
    _summary(report)


def cmd_local_test(args) -> None:
    data = read_series_csv(args.input)
    splits = _load_splits(args, len(data))
    cfg = TestConfig(B=args.B, k=0, bandwidth=args.bandwidth, seed=args.seed)
    report = local_test(data, splits, args.center, args.epsilon, cfg)
    if args.report:
        write_report_csv(report, args.report)
    _summary(report)


def cmd_label_events(args) -> None:
    series = read_intensity_csv(args.input)
    if args.genesis_filter is not None:
        series = filter_genesis_lysis(series, args.genesis_filter)
    labels = label_rapid_events(series, args.threshold, args.direction.upper())
    if args.fine_steps > 1:
        labels = interpolate_labels(labels, args.fine_steps)
    elif args.fine_steps < 1:
        raise ValueError("--fine-steps must be >= 1")
    if args.out is None:
        sys.stdout.write("t,y\n" + "".join(f"{t:g},{y}\n" for t, y in zip(labels.times, labels.labels)))
    else:
        write_labels_csv(labels, args.out)


def cmd_experiment(args) -> None:
    from .runner import load_config, run_experiment

    cfg = load_config(args.config, args.set)
    for key in ("trials", "seed", "B", "threads"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    if args.no_svg:
        cfg["svg"] = False
    args.out.mkdir(parents=True, exist_ok=True)
    for path in run_experiment(args.kind, cfg, args.out):
        print(path)


COMMANDS = {
    "simulate": cmd_simulate,
    "split": cmd_split,
    "test": cmd_test,
    "local-test": cmd_local_test,
    "label-events": cmd_label_events,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except DataError as e:
        print(f"seqdiff: data error: {e}", file=sys.stderr)
        return 2
    except (OSError, UnicodeDecodeError) as e:
        print(f"seqdiff: cannot read input: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"seqdiff: invalid argument: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
