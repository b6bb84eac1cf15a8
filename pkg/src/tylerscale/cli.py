"""Command-line surface: estimate, diagnose, simulate, sweep, converge.

Every command is deterministic: identical flags and seed produce
byte-identical output files.  Exit codes: 0 success/converged, 1 I/O,
parse, or argument errors, 2 non-converged estimation (diverged or no
solution), 3 spectral budget exceeded.
"""

import argparse
import concurrent.futures
import math
import sys
from pathlib import Path

import numpy as np

from . import expander, formats, sinkhorn, tyler
from .cpmap import DiagonalOutputMap, VectorTuple
from .errors import BudgetExceeded, InsufficientData, InvalidArgument, TylerScaleError
from .linalg import PDMatrix, error_frob, error_op, normalize
from .sampling import STREAM_CONVERGE, STREAM_SWEEP, EllipticalSpec, UDist, sample_elliptical
from .sinkhorn import RunStatus


def _load_shape(text, p):
    if text == "identity":
        return PDMatrix(np.eye(p))
    m = formats.read_matrix_csv(text)
    if m.shape != (p, p):
        raise InvalidArgument(f"shape file is {m.shape[0]}x{m.shape[1]}, expected {p}x{p}")
    return PDMatrix(m)


def _prefix(args, default_stem):
    return args.out_prefix if args.out_prefix else default_stem


def _cmd_estimate(args):
    x = formats.read_samples_csv(args.samples, transpose=args.transpose)
    limit = 16 if args.check_existence else 0
    result = tyler.estimate(VectorTuple(x), tol=args.tol, max_iters=args.max_iters,
                            existence_limit=limit)
    prefix = _prefix(args, str(Path(args.samples).with_suffix("")))
    formats.write_matrix_csv(f"{prefix}_shape.csv", result.sigma_hat.entries)
    formats.write_trace_csv(f"{prefix}_trace.csv", result.trace)
    formats.write_verdict_jsonl(f"{prefix}_verdict.jsonl", result.verdict,
                                x.shape[0], x.shape[1])
    print(f"status={result.trace.status.value} residual={result.residual:.3e} "
          f"verdict={result.verdict.status.value}")
    failed = (result.trace.status is not RunStatus.CONVERGED
              or result.verdict.status is tyler.VerdictStatus.NO_SOLUTION)
    return 2 if failed else 0


def _diagnose_one(phi, budget, seed, prefix, suffix=""):
    report = expander.expansion_constant(phi)
    value, _ = expander.cheeger_upper_bound(phi.tuple, budget)
    record = formats.diagnostics_record(report, value, phi.out_dim, phi.in_dim, seed)
    formats.write_diagnostics_text(f"{prefix}_diagnostics{suffix}.txt", record)
    formats.write_diagnostics_csv(f"{prefix}_diagnostics{suffix}.csv", record)
    print(" ".join(f"{k}={record[k]}" for k in formats.DIAGNOSTIC_KEYS))
    return record


def _cmd_diagnose(args):
    x = formats.read_samples_csv(args.samples, transpose=args.transpose)
    v = VectorTuple(x).unit_normalized()
    budget = expander.CandidateBudget(span_size=args.budget_spans,
                                      random_count=args.budget_random, seed=args.seed)
    prefix = _prefix(args, str(Path(args.samples).with_suffix("")))
    _diagnose_one(DiagonalOutputMap(v), budget, args.seed, prefix)
    if args.with_scaled:
        result = tyler.estimate(v, tol=args.tol, max_iters=args.max_iters)
        scaled = tyler.scaled_operator(v, result.sigma_hat)
        _diagnose_one(scaled, budget, args.seed, prefix, suffix="_scaled")
    return 0


def _cmd_simulate(args):
    spec = EllipticalSpec(p=args.p, shape=_load_shape(args.shape, args.p),
                          u_dist=UDist.parse(args.u), seed=args.seed)
    samples = sample_elliptical(spec, args.n)
    prefix = _prefix(args, "samples")
    formats.write_samples_csv(f"{prefix}.csv", samples.vectors)
    formats.write_sidecar(f"{prefix}.meta", {
        "p": args.p, "n": args.n, "seed": args.seed,
        "u_dist": spec.u_dist.label, "shape": args.shape,
    })
    print(f"wrote {prefix}.csv ({args.n} samples, dim {args.p})")
    return 0


def _sweep_trial(params):
    """One (n, trial) cell; used by the process pool, so fully top level."""
    p, n, trial, seed, u_label, shape_entries, tol, max_iters = params
    shape = PDMatrix(shape_entries)
    spec = EllipticalSpec(p=p, shape=shape, u_dist=UDist.parse(u_label), seed=seed)
    truth = normalize(shape, "trace_p")
    try:
        samples = sample_elliptical(spec, n, key=(STREAM_SWEEP, n, trial))
        result = tyler.estimate(samples, tol=tol, max_iters=max_iters, existence_limit=0)
        if result.trace.status is not RunStatus.CONVERGED:
            return (n, trial, math.nan, math.nan, result.trace.final.index,
                    result.trace.status.value)
        err_o = error_op(truth, result.sigma_hat)
        err_f = error_frob(truth, result.sigma_hat)
        return (n, trial, err_o, err_f, result.trace.final.index, "ok")
    except TylerScaleError as exc:
        return (n, trial, math.nan, math.nan, 0, type(exc).__name__)


def _cmd_sweep(args):
    if args.trials < 1:
        raise InvalidArgument("trials must be at least 1")
    n_list = [int(s) for s in args.n_list.split(",") if s]
    if not n_list:
        raise InvalidArgument("empty n-list")
    for n in n_list:
        if n < args.p + 1:
            raise InvalidArgument(f"n = {n} is below p + 1 = {args.p + 1}")
    shape = _load_shape(args.shape, args.p)
    tasks = [(args.p, n, t, args.seed, args.u, shape.entries, args.tol, args.max_iters)
             for n in n_list for t in range(args.trials)]
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_trial, tasks))
    else:
        rows = [_sweep_trial(t) for t in tasks]
    rows.sort(key=lambda r: (r[0], r[1]))
    prefix = _prefix(args, "sweep")
    formats.write_sweep_results_csv(f"{prefix}_results.csv", rows)
    medians = []
    for n in n_list:
        err_o = np.array([r[2] for r in rows if r[0] == n])
        err_f = np.array([r[3] for r in rows if r[0] == n])
        medians.append((n, float(np.nanmedian(err_o)), float(np.nanmedian(err_f))))
    formats.write_sweep_medians_csv(f"{prefix}_medians.csv", medians)
    col = 1 if args.metric == "op" else 2
    for row in medians:
        print(f"n={row[0]} median_err_{args.metric}={row[col]:.6e}")
    return 0


def _cmd_converge(args):
    if args.n < 40 * args.p:
        print(f"warning: n = {args.n} is below 40 p = {40 * args.p}; "
              "the expander regime may not apply", file=sys.stderr)
    spec = EllipticalSpec(p=args.p, shape=PDMatrix(np.eye(args.p)),
                          u_dist=UDist.parse(args.u), seed=args.seed)
    samples = sample_elliptical(spec, args.n, key=(STREAM_CONVERGE,))
    result = tyler.estimate(samples, tol=args.tol, max_iters=args.max_iters,
                            existence_limit=0)
    prefix = _prefix(args, "converge")
    formats.write_trace_csv(f"{prefix}_trace.csv", result.trace)
    try:
        slope, r2 = sinkhorn.linear_rate_estimate(result.trace, args.tail_fraction)
        summary = f"slope={slope:.17g} r2={r2:.17g}"
    except InsufficientData as exc:
        summary = f"rate=insufficient_data ({exc})"
    lines = [
        f"status={result.trace.status.value}",
        f"iterations={result.trace.final.index}",
        f"final_grad_norm={result.trace.final.grad_norm:.17g}",
        summary,
    ]
    with open(f"{prefix}_rate.txt", "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tylerscale",
        description="Shape-matrix estimation by operator scaling, with exact "
                    "expansion diagnostics and desk-scale experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate the shape matrix from a samples CSV")
    est.add_argument("samples")
    est.add_argument("--tol", type=float, default=1e-8)
    est.add_argument("--max-iters", type=int, default=10000)
    est.add_argument("--check-existence", action="store_true",
                     help="run the exhaustive subspace enumeration (n <= 16)")
    est.add_argument("--transpose", action="store_true", help="samples are columns")
    est.add_argument("--out-prefix", default=None)
    est.set_defaults(func=_cmd_estimate)

    diag = sub.add_parser("diagnose", help="expansion/conductance diagnostics of the sample map")
    diag.add_argument("samples")
    diag.add_argument("--budget-spans", type=int, default=2)
    diag.add_argument("--budget-random", type=int, default=8)
    diag.add_argument("--with-scaled", action="store_true",
                      help="also diagnose the estimator-whitened map")
    diag.add_argument("--tol", type=float, default=1e-8)
    diag.add_argument("--max-iters", type=int, default=10000)
    diag.add_argument("--transpose", action="store_true")
    diag.add_argument("--seed", type=int, default=0)
    diag.add_argument("--out-prefix", default=None)
    diag.set_defaults(func=_cmd_diagnose)

    sim = sub.add_parser("simulate", help="draw elliptical samples to a CSV")
    sim.add_argument("--p", type=int, required=True)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--shape", default="identity", help="matrix CSV path or 'identity'")
    sim.add_argument("--u", default="const",
                     help="const | lognormal:S | pareto:A | cauchy")
    sim.add_argument("--out-prefix", default=None)
    sim.set_defaults(func=_cmd_simulate)

    swp = sub.add_parser("sweep", help="error-vs-n Monte Carlo sweep")
    swp.add_argument("--p", type=int, required=True)
    swp.add_argument("--n-list", required=True, help="comma-separated sample counts")
    swp.add_argument("--trials", type=int, required=True)
    swp.add_argument("--seed", type=int, default=0)
    swp.add_argument("--metric", choices=("op", "frob"), default="op")
    swp.add_argument("--u", default="const")
    swp.add_argument("--shape", default="identity")
    swp.add_argument("--tol", type=float, default=1e-8)
    swp.add_argument("--max-iters", type=int, default=10000)
    swp.add_argument("--jobs", type=int, default=1)
    swp.add_argument("--out-prefix", default=None)
    swp.set_defaults(func=_cmd_sweep)

    con = sub.add_parser("converge", help="trace one seeded run and fit its linear rate")
    con.add_argument("--p", type=int, required=True)
    con.add_argument("--n", type=int, required=True)
    con.add_argument("--seed", type=int, default=0)
    con.add_argument("--tol", type=float, default=1e-10)
    con.add_argument("--max-iters", type=int, default=10000)
    con.add_argument("--u", default="const")
    con.add_argument("--tail-fraction", type=float, default=0.5)
    con.add_argument("--out-prefix", default=None)
    con.set_defaults(func=_cmd_converge)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return 3
    except TylerScaleError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
