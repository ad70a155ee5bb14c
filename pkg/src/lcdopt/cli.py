"""Benchmark command line: ``lcd run | verify | sweep``.

``run`` solves one task with one or more methods from a shared starting
point and writes per-method trace CSVs plus a summary; ``verify``
executes the sampled inequality suites; ``sweep`` repeats ``run`` over a
regularization grid and writes an index of the outputs.

Exit codes: 0 success, 1 usage error, 2 data error, 3 divergence or suite
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import absconvex as acv
from . import dataio
from . import objectives as obj_mod
from . import verification
from ._backend import KERNEL_BACKEND
from .curvature import CurvatureModel, spectral_norm_sq
from .errors import LcdError
from .solvers import SolverConfig, find_excess_by_doubling, run

TASKS = ("logistic", "ridge", "least-squares", "huber", "pnorm-regression")
DEFAULT_SWEEP_FRACTIONS = (1e-4, 1e-3 / 3.0, 1e-3)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_FAILURE = 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lcd",
        description="curvature-descent solvers and verification suites",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="solve one task, write trace CSVs")
    _add_experiment_flags(run_p)

    verify_p = sub.add_parser("verify", help="run the inequality suites")
    verify_p.add_argument("--scope", default="all",
                          choices=["all", *verification.SCOPES])
    verify_p.add_argument("--seed", type=int, default=0)
    verify_p.add_argument("--samples", type=int, default=2000)

    sweep_p = sub.add_parser("sweep", help="run over a regularization grid")
    _add_experiment_flags(sweep_p)
    return parser


def _add_experiment_flags(p):
    p.add_argument("--dataset", required=True, help="LibSVM-format file")
    p.add_argument("--task", required=True, choices=TASKS)
    p.add_argument("--lambda", dest="lam", type=str, default=None,
                   help="absolute regularization weight(s), comma separated")
    p.add_argument("--lambda-frac-of-L", dest="lam_frac", type=str,
                   default=None,
                   help="regularization as fraction(s) of the smoothness "
                        "constant, comma separated")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--methods", default="polyak,lcd2",
                   help="comma separated subset of gd,polyak,lcd1,lcd2,lcd3")
    p.add_argument("--gamma", type=float, default=None,
                   help="fixed stepsize for gd (default 1/L)")
    p.add_argument("--curvature", default=None,
                   choices=["regularizer-only", "full-quadratic",
                            "abs-convex-sos"])
    p.add_argument("--lc", type=float, default=None,
                   help="override the smoothness excess used by lcd1")
    p.add_argument("--max-iters", type=int, default=300)
    p.add_argument("--f-tol", type=float, default=None)
    p.add_argument("--g-tol", type=float, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=2000)


def results_root(args):
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("LCD_RESULTS_DIR", "results"))


def smoothness_constant(task, dataset):
    """The L used by the fraction-of-L convention: the logistic bound
    lambda_max(A^T A)/(4n) for classification, the quadratic Hessian norm
    otherwise."""
    A = dataset.rows
    if task == "logistic":
        return spectral_norm_sq(A) / (4.0 * A.shape[0])
    return spectral_norm_sq(A) * 2.0 / A.shape[0]


def resolve_lambdas(args, dataset, default_fracs=None):
    """Absolute weights from --lambda, or fractions of L from
    --lambda-frac-of-L; sweep supplies default fractions."""
    if args.lam is not None and args.lam_frac is not None:
        raise ValueError("pass --lambda or --lambda-frac-of-L, not both")
    L = smoothness_constant(args.task, dataset)
    if args.lam is not None:
        values = [float(tok) for tok in args.lam.split(",") if tok]
        return values, L
    if args.lam_frac is not None:
        fracs = [float(tok) for tok in args.lam_frac.split(",") if tok]
        return [f * L for f in fracs], L
    if default_fracs is not None:
        return [f * L for f in default_fracs], L
    return [1e-3 * L], L


def build_objective(task, dataset, lam, p, delta, curvature):
    A, b = dataset.rows, dataset.labels
    if task == "logistic":
        return obj_mod.logistic_lp(A, b, lam, p)
    if task == "ridge":
        return obj_mod.ridge(A, b, lam, curvature or "full-quadratic")
    if task == "least-squares":
        return obj_mod.least_squares(A, b)
    if task == "pnorm-regression":
        return obj_mod.pnorm_regression(A, b, p)
    if task == "huber":
        if curvature == "abs-convex-sos":
            phis = [acv.precompose_affine(acv.huber_lifted(delta),
                                          A[i], -b[i:i + 1])
                    for i in range(A.shape[0])]
            return acv.sum_of_squares_problem(phis, name="huber_sos")
        return obj_mod.huber_sq_regression(A, b, delta)
    raise ValueError(f"unknown task {task!r}")


def _load_dataset(args):
    classification = args.task == "logistic"
    return dataio.parse_libsvm(Path(args.dataset), classification=classification)


def run_experiment(args, lam, L, dataset, out_dir, tag=""):
    """Build, resolve the optimum, run each method; returns (summary,
    worst_exit)."""
    objective = build_objective(args.task, dataset, lam, args.p, args.delta,
                                args.curvature)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    lc = args.lc
    lc_heuristic = False
    if lc is None and "lcd1" in methods and objective.model.excess is None:
        # lower-bound-only model: tune the smoothness excess by doubling
        lc = find_excess_by_doubling(objective)
        lc_heuristic = True
    if lc is not None:
        model = objective.model
        objective = obj_mod.with_model(objective, CurvatureModel(
            model._map, excess=lc, constant=model.constant,
            structure_tag=model.structure_tag))
    key = (f"{dataio.dataset_hash(dataset)}-{args.task}-lam{lam:.6g}"
           f"-p{args.p:g}-delta{args.delta:g}-{args.curvature or 'default'}")
    f_star = dataio.fstar_cache_get_or_compute(
        objective, key, results_root(args),
        lower_bound=objective.meta.get("lower_bound", 0.0))
    objective = obj_mod.with_f_star(objective, f_star)
    x0 = np.zeros(objective.dim)
    summary = {}
    exit_code = EXIT_OK
    for method in methods:
        gamma = args.gamma
        if method == "gd" and gamma is None:
            reg_curvature = 2.0 * lam if args.task in ("logistic", "ridge") else 0.0
            gamma = 1.0 / (L + reg_curvature)
        cfg = SolverConfig(method=method, gamma=gamma,
                           max_iters=args.max_iters, f_tol=args.f_tol,
                           g_tol=args.g_tol, seed=args.seed)
        trace = run(objective, cfg, x0=x0)
        metadata = {
            "method": method,
            "task": args.task,
            "dataset": str(args.dataset),
            "dataset_hash": dataio.dataset_hash(dataset),
            "lambda": lam,
            "p": args.p,
            "delta": args.delta,
            "L": L,
            "lc": lc,
            "lc_heuristic": lc_heuristic,
            "curvature": args.curvature,
            "f_star": f_star,
            "f_star_provenance": "cache",
            "seed": args.seed,
            "kernel_backend": KERNEL_BACKEND,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        }
        name = f"{args.task}{tag}_{method}.csv"
        path = dataio.write_trace_csv(dataio.RunRecord(metadata, trace),
                                      out_dir / name)
        summary[method] = {
            "csv": str(path),
            "status": trace.status,
            "iterations": len(trace.records),
            "final_f_gap": trace.final_f_gap,
            "error": trace.error,
        }
        if trace.status == "diverged":
            exit_code = EXIT_FAILURE
    return summary, exit_code


def cmd_run(args):
    try:
        dataset = _load_dataset(args)
    except LcdError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        lams, L = resolve_lambdas(args, dataset)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out_dir = results_root(args)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        summary, code = run_experiment(args, lams[0], L, dataset, out_dir)
    except LcdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    for method, info in summary.items():
        print(f"{method}: {info['status']} after {info['iterations']} "
              f"iterations, final f-gap {info['final_f_gap']:.3e}")
    return code


def cmd_sweep(args):
    try:
        dataset = _load_dataset(args)
    except LcdError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        lams, L = resolve_lambdas(args, dataset,
                                  default_fracs=DEFAULT_SWEEP_FRACTIONS)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not lams:
        print("usage error: empty lambda grid", file=sys.stderr)
        return EXIT_USAGE
    out_dir = results_root(args)
    out_dir.mkdir(parents=True, exist_ok=True)
    index = []
    code = EXIT_OK
    for i, lam in enumerate(lams):
        summary, point_code = run_experiment(args, lam, L, dataset, out_dir,
                                             tag=f"_lam{i}")
        code = max(code, point_code)
        index.append({"lambda": lam, "lambda_over_L": lam / L,
                      "runs": summary})
        print(f"lambda={lam:.6g} ({lam / L:.3g} L): "
              + ", ".join(f"{m}:{info['status']}"
                          for m, info in summary.items()))
    (out_dir / "index.json").write_text(json.dumps(index, indent=2) + "\n")
    return code


def cmd_verify(args):
    if args.samples == 0:
        print("warning: --samples=0 runs vacuous suites (nothing checked)")
    results = verification.run_suites(args.scope, args.samples, args.seed)
    failed = False
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.name}: worst={res.worst:.3e} "
              f"tol={res.tol:.1e} samples={res.samples}"
              + (f"  ({res.detail})" if res.detail and not res.passed else ""))
        failed = failed or not res.passed
    return EXIT_FAILURE if failed else EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    if args.command == "run":
        return cmd_run(args)
    if args.command == "sweep":
        return cmd_sweep(args)
    return cmd_verify(args)


if __name__ == "__main__":
    sys.exit(main())
