"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 data/validation error, 4 numerical failure.
CSV goes to ``--out`` (or standard output); wall time is reported on
standard error so the CSV itself is byte-stable for fixed flags and seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time

import numpy as np

from . import harness
from .kernel import ConvergenceError, DomainError
from .streams import DataError, ingest_csv, matrix_mean, parse_dist, sample_path

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _fmt(v):
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def write_csv(header, rows, out, footer=()):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    for line in footer:
        out.write(f"# {line}\n")


def _common(p: argparse.ArgumentParser, methods: str | None = None):
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--kappa", type=float, default=0.25)
    p.add_argument("--eta", type=float, default=2.0)
    p.add_argument("--s", type=float, default=1.4)
    p.add_argument("--l0", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=int, default=1000)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--methods", default=methods)
    p.add_argument("--dist", default=None, help="scenario, e.g. bernoulli:0.5 or switch:0.8,0.2,0.1")
    p.add_argument("--csv", default=None, help="read observations from a CSV file")
    p.add_argument("--out", default=None, help="write CSV here instead of standard output")
    p.add_argument("--epoch", choices=("floor", "continuous"), default="floor")
    p.add_argument("--wsr-variant", choices=("alpha", "noalpha"), default="alpha")
    p.add_argument("--hrms-center", choices=("smoothed", "sample_mean", "predictor"),
                   default="smoothed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ebcs", description="Empirical Bernstein confidence sequences")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("track", help="per-step intervals on one stream")
    _common(p, "apx")
    p = sub.add_parser("compare", help="median widths on a log-spaced grid")
    _common(p, "apx,wsr,hrms")
    p.add_argument("--per-decade", type=int, default=64)
    p = sub.add_parser("coverage", help="Monte Carlo any-time miscoverage")
    _common(p, "apx")
    p.add_argument("--workers", type=int, default=1)
    p = sub.add_parser("kappa-sweep", help="mixture CS widths across kappa")
    _common(p)
    p.add_argument("--kappas", default="0.1,0.25,1,10,100")
    p.add_argument("--per-decade", type=int, default=16)
    p = sub.add_parser("matrix-track", help="matrix CS on one matrix stream")
    _common(p, "mat_apx")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--generator", default="diagonal-bernoulli:0.5")
    p = sub.add_parser("asymptotics", help="limiting widths and E psi_E table")
    _common(p)
    p.add_argument("--times", default="10000,1000000")
    return parser


def _methods(args):
    if not args.methods:
        raise UsageError("--methods is required")
    return [m.strip() for m in args.methods.split(",") if m.strip()]


def _config(args) -> harness.RunConfig:
    return harness.RunConfig(alpha=args.alpha, kappa=args.kappa, eta=args.eta, s=args.s,
                             l0=args.l0, sigma=args.sigma, a=args.a, wsr_variant=args.wsr_variant,
                             hrms_center=args.hrms_center, epoch=args.epoch)


def _scenario(args, d: int = 1):
    if args.dist is None:
        raise UsageError("--dist is required here")
    return parse_dist(args.dist, seed=args.seed, d=d)


def _source(args):
    """Observations and running mean (None for CSV input)."""
    if (args.dist is None) == (args.csv is None):
        raise UsageError("give exactly one of --dist and --csv")
    if args.csv is not None:
        return ingest_csv(args.csv), None
    spec = _scenario(args)
    obs, mp = sample_path(spec, args.horizon)
    return obs, mp.mu


def run(args, out) -> None:
    cfg = _config(args) if args.command != "matrix-track" else None
    footer = [f"seed={args.seed}", f"command={args.command}"]
    if args.horizon < 1:
        raise UsageError("--horizon must be >= 1")
    if args.command == "track":
        methods = harness.check_methods(_methods(args), cfg)
        obs, mu = _source(args)
        if obs.ndim != 1:
            raise DataError("track needs a scalar stream; use matrix-track")
        header, rows = harness.track(obs, methods, cfg, mu)
    elif args.command == "compare":
        methods = harness.check_methods(_methods(args), cfg)
        header, rows = harness.compare(_scenario(args), methods, args.horizon, args.reps, cfg,
                                       args.per_decade)
    elif args.command == "coverage":
        methods = harness.check_methods(_methods(args), cfg)
        spec = _scenario(args)
        res = harness.coverage(spec, methods, args.reps, args.horizon, cfg, workers=args.workers)
        header, rows = harness.coverage_rows(res)
    elif args.command == "kappa-sweep":
        kappas = [float(k) for k in args.kappas.split(",") if k.strip()]
        header, rows = harness.kappa_sweep(_scenario(args), kappas, args.horizon, args.reps,
                                           args.alpha, args.per_decade)
    elif args.command == "matrix-track":
        methods = _methods(args)
        bad = [m for m in methods if m not in harness.MATRIX_METHODS]
        if bad:
            raise UsageError(f"unknown matrix method(s): {', '.join(bad)}")
        if args.csv is not None:
            obs = ingest_csv(args.csv)
            if obs.ndim != 3:
                raise DataError("matrix-track needs a matrix CSV (first line d=<int>)")
            mean = None
        else:
            spec = parse_dist(args.generator, seed=args.seed, d=args.d)
            if not spec.is_matrix:
                raise UsageError(f"{args.generator!r} is not a matrix generator")
            obs, _ = sample_path(spec, args.horizon)
            mean = matrix_mean(spec)
        header, rows = harness.matrix_track(obs, methods, args.alpha, args.kappa, mean)
    else:
        times = [int(float(v)) for v in args.times.split(",") if v.strip()]
        header, rows = harness.asymptotics_rows(args.alpha, times, sigma=args.sigma or 0.5)
    if cfg is not None:
        footer.append(f"config={cfg.echo()}")
    write_csv(header, rows, out, footer)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    start = time.perf_counter()
    buf = io.StringIO()
    try:
        run(args, buf)
    except (UsageError, DomainError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except (ConvergenceError, FloatingPointError, np.linalg.LinAlgError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    print(f"wall_time_s={time.perf_counter() - start:.3f}", file=sys.stderr)
    return EXIT_OK


def main_entry() -> None:
    sys.exit(main())
