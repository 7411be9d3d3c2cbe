"""Command-line entry point: ``sdnig {simulate,moments,benchmark,price,calibrate}``.

Exit codes: 0 success, 2 invalid input, 3 numerical-domain error,
4 non-convergence.  Errors go to stderr as one JSON object; no output file
is left behind on failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import dataio, reports
from .calibration import calibrate
from .errors import ConvergenceError, SdnigError, ValidationError
from .pricing import price_table
from .simulation import simulate


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _emit(args, columns, rows, obj=None):
    text = dataio.json_text(obj if obj is not None else list(rows)) if args.format == "json" \
        else dataio.csv_text(columns, rows)
    if args.out:
        dataio.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args):
    p = dataio.read_params(args.params)
    if args.model and args.model != p.model_tag:
        raise ValidationError(f"--model {args.model} does not match params file ({p.model_tag})", ["model tag"])
    batch = simulate(p, dataio.parse_grid(args.grid), args.n_paths, args.seed, workers=args.workers)
    rows = list(dataio.paths_rows(batch))
    _emit(args, dataio.PATH_COLUMNS, rows)


def cmd_moments(args):
    a_list = dataio.parse_float_list(args.a_list, "a")
    rows = reports.moment_table(args.delta, args.gamma, a_list, args.n_sim, args.seed, workers=args.workers)
    _emit(args, reports.MOMENT_COLUMNS, rows)


def cmd_benchmark(args):
    sizes = [int(x) for x in dataio.parse_float_list(args.sizes, "size")]
    rows = reports.benchmark_table(sizes, args.reps, args.delta, args.gamma, args.a, args.seed)
    _emit(args, reports.BENCH_COLUMNS, rows)


def cmd_price(args):
    p = dataio.read_params(args.params)
    if args.model and args.model != p.model_tag:
        raise ValidationError(f"--model {args.model} does not match params file ({p.model_tag})", ["model tag"])
    contract = dataio.read_contract(args.contract)
    strikes = dataio.parse_k_grid(args.k_grid) if args.k_grid else [contract.K]
    rows = price_table(p, contract, strikes, args.n_sim, args.seed, args.method, workers=args.workers)
    _emit(args, dataio.PRICE_COLUMNS, rows)


def cmd_calibrate(args):
    quotes = dataio.read_quotes(args.quotes)
    forwards = dataio.read_forwards(args.forwards)
    if (args.rho_mkt is None) == (args.series is None):
        raise ValidationError("give exactly one of --rho-mkt and --series", ["rho source"])
    rho = args.rho_mkt if args.rho_mkt is not None else dataio.compute_hist_correlation(dataio.read_series(args.series))
    fixed = json.loads(args.fixed) if args.fixed else None
    res = calibrate(args.model, quotes, forwards, args.rate, rho, fixed=fixed, workers=args.workers,
                    max_iter=args.max_iter)
    report = res.to_report()
    if args.params_out:
        dataio.atomic_write(args.params_out, dataio.json_text(res.params.to_dict()))
    text = dataio.json_text(report)
    if args.out:
        dataio.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sdnig", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=12345)
        p.add_argument("--workers", type=_positive_int, default=1)
        if fmt:
            p.add_argument("--format", choices=["csv", "json"], default="csv")

    models = ["SSD", "LSSD", "BBSD"]
    s = sub.add_parser("simulate", help="simulate joint paths of (Y1, Y2)")
    s.add_argument("--model", choices=models)
    s.add_argument("--params", required=True, help="JSON params file")
    s.add_argument("--grid", required=True, help="'t0,t1,...' or 'T:n'")
    s.add_argument("--n-paths", type=_positive_int, required=True)
    common(s)
    s.set_defaults(fn=cmd_simulate)

    m = sub.add_parser("moments", help="theoretical vs MC raw moments of Z_a")
    m.add_argument("--delta", type=float, default=5.0)
    m.add_argument("--gamma", type=float, default=1.5)
    m.add_argument("--a-list", default="0.1,0.5,0.7,0.9")
    m.add_argument("--n-sim", type=_positive_int, default=10**6)
    common(m)
    m.set_defaults(fn=cmd_moments)

    b = sub.add_parser("benchmark", help="time the mixture and acceptance-rejection jump samplers")
    b.add_argument("--sizes", default="1000,10000,100000,1000000")
    b.add_argument("--reps", type=_positive_int, default=100)
    b.add_argument("--delta", type=float, default=5.0)
    b.add_argument("--gamma", type=float, default=1.5)
    b.add_argument("--a", type=float, default=0.5)
    common(b)
    b.set_defaults(fn=cmd_benchmark)

    p = sub.add_parser("price", help="spread option prices by MC and/or Fourier")
    p.add_argument("--model", choices=models)
    p.add_argument("--params", required=True)
    p.add_argument("--contract", required=True, help="JSON with K, T, r, f1_0, f2_0")
    p.add_argument("--k-grid", help="'k0,k1,...' or 'start:stop:step'")
    p.add_argument("--method", choices=["mc", "fourier", "both"], default="both")
    p.add_argument("--n-sim", type=_positive_int, default=10**6)
    common(p)
    p.set_defaults(fn=cmd_price)

    c = sub.add_parser("calibrate", help="two-step calibration to vanilla quotes and a correlation")
    c.add_argument("--model", choices=models, required=True)
    c.add_argument("--quotes", required=True, help="CSV underlying_id,maturity,strike,price")
    c.add_argument("--forwards", required=True, help="CSV underlying_id,forward (row order = legs)")
    c.add_argument("--rho-mkt", type=float)
    c.add_argument("--series", help="CSV date,<id1>,<id2>; rho_mkt from log-returns")
    c.add_argument("--rate", type=float, default=0.015)
    c.add_argument("--fixed", help='JSON object of pinned dependence params, e.g. {"a": 0.99}')
    c.add_argument("--params-out", help="write calibrated params JSON here")
    c.add_argument("--max-iter", type=_positive_int, help="simplex iteration budget per start")
    common(c, fmt=False)
    c.set_defaults(fn=cmd_calibrate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.fn(args)
    except SdnigError as exc:
        err = dict(error=type(exc).__name__, message=str(exc), exit_code=exc.exit_code)
        if isinstance(exc, ValidationError):
            err["violations"] = exc.violations
        if isinstance(exc, ConvergenceError) and exc.best is not None:
            err["best"] = repr(exc.best)
        sys.stderr.write(json.dumps(err) + "\n")
        return exc.exit_code
    except json.JSONDecodeError as exc:
        sys.stderr.write(json.dumps(dict(error="ValidationError", message=f"--fixed: {exc.msg}", exit_code=2)) + "\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
