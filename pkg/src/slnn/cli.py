"""Command-line front end: ``slnn solve|gradcheck|basis|table``.

Exit codes: 0 success/converged, 1 not converged (or check failed),
2 invalid invocation, 3 numeric divergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import legendre, report
from .errors import DivergenceError, ExprSyntaxError, ProblemSchemaError, SLNNError, UnknownProblemError
from .network import NetworkParams
from .problems import BUILTINS, ProblemSpec, builtin, load_problem
from .training import TrainConfig, finite_diff_gradient, loss_gradient, train

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_USAGE, EXIT_DIVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- argument types: each raises ArgumentTypeError so argparse names the flag

def _int_in(lo, hi=None):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if v < lo or (hi is not None and v > hi):
            bound = f">= {lo}" if hi is None else f"in [{lo}, {hi}]"
            raise argparse.ArgumentTypeError(f"must be {bound}, got {v}")
        return v

    return parse


def _float(positive=False, nonneg=False, upper=None):
    def parse(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
        if not math.isfinite(v):
            raise argparse.ArgumentTypeError(f"must be finite, got {text}")
        if positive and not v > 0:
            raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
        if nonneg and v < 0:
            raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
        if upper is not None and v > upper:
            raise argparse.ArgumentTypeError(f"must be <= {upper}, got {v}")
        return v

    return parse


def _weights(text):
    try:
        w = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not all(math.isfinite(v) for v in w):
        raise argparse.ArgumentTypeError("weights must be finite")
    if not 1 <= len(w) <= legendre.MAX_ORDER:
        raise argparse.ArgumentTypeError(f"need 1..{legendre.MAX_ORDER} weights")
    return w


ORDER = _int_in(1, legendre.MAX_ORDER)
SEED = _int_in(0, 2**64 - 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slnn",
        description="Shifted Legendre functional-link network solver for Lane-Emden type singular IVPs.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="{solve,gradcheck,basis,table}")

    p = sub.add_parser("solve", help="train on a problem and write an error table")
    p.add_argument("--problem", required=True, help="built-in name (example1, example2) or path to a problem JSON file")
    p.add_argument("--order", type=ORDER, default=5, help="number of basis functions m (default 5)")
    p.add_argument("--train-points", type=_int_in(2), default=10, help="collocation points h (default 10)")
    p.add_argument("--activation", choices=["tanh", "identity"], default="tanh", help="output activation (default tanh)")
    p.add_argument("--lr", type=_float(positive=True), default=0.01, help="learning rate rho (default 0.01)")
    p.add_argument("--max-iters", type=_int_in(1), default=50_000, help="iteration cap (default 50000)")
    p.add_argument("--tol", type=_float(nonneg=True), default=1e-12, help="stop once the loss is <= this (default 1e-12)")
    p.add_argument("--stationarity-tol", type=_float(nonneg=True), default=TrainConfig.stationarity_tol,
                   help="stop once the largest residual/Jacobian-column cosine is <= this "
                        f"(default {TrainConfig.stationarity_tol:g}; 0 disables)")
    p.add_argument("--sufficient-decrease", type=_float(nonneg=True, upper=1.0), default=TrainConfig.sufficient_decrease,
                   help="Armijo constant c for backtracking; 0 only rejects loss increases "
                        f"(default {TrainConfig.sufficient_decrease:g})")
    p.add_argument("--seed", type=SEED, default=0, help="weight initialization seed (default 0)")
    p.add_argument("--init-range", type=_float(positive=True), default=0.5, help="initial weights ~ U[-r, r] (default 0.5)")
    p.add_argument("--no-backtracking", action="store_true", help="take every step at the full learning rate")
    p.add_argument("--test-points", type=_int_in(1), default=19, help="test grid size k (default 19)")
    p.add_argument("--out", help="report path ('-' for stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv", help="report format (default csv)")
    p.add_argument("--loss-history", help="write iter,loss CSV here")
    p.add_argument("--precision", choices=["full", "paper"], default="full", help="full round-trip digits or 4 decimals")
    p.set_defaults(func=run_solve)

    p = sub.add_parser("gradcheck", help="compare the analytic loss gradient with central differences")
    p.add_argument("--problem", help="built-in name or problem file (default: every built-in)")
    p.add_argument("--order", type=ORDER, default=5, help="number of basis functions m (default 5)")
    p.add_argument("--train-points", type=_int_in(2), default=10, help="collocation points per trial (default 10)")
    p.add_argument("--activation", choices=["tanh", "identity", "both"], default="both", help="activations to check (default both)")
    p.add_argument("--trials", type=_int_in(1), default=100, help="random configurations per problem and activation (default 100)")
    p.add_argument("--seed", type=SEED, default=0, help="sampling seed (default 0)")
    p.add_argument("--step", type=_float(positive=True, upper=1e-3), default=1e-6, help="central-difference step (default 1e-6)")
    p.add_argument("--weight-range", type=_float(positive=True), default=1.0, help="weights ~ U[-r, r] (default 1)")
    p.add_argument("--tolerance", type=_float(nonneg=True), default=1e-6, help="pass iff worst relative discrepancy < this (default 1e-6)")
    p.add_argument("--abs-floor", type=_float(nonneg=True), default=1e-9, help="absolute differences below this count as agreement (default 1e-9)")
    p.set_defaults(func=run_gradcheck)

    p = sub.add_parser("basis", help="tabulate shifted Legendre polynomials")
    p.add_argument("--order", type=ORDER, required=True, help="number of basis functions m")
    p.add_argument("--points", type=_int_in(2), default=11, help="equispaced points on [0, 1] (default 11)")
    p.add_argument("--derivatives", action="store_true", help="add dL_k and d2L_k columns")
    p.add_argument("--check-orthogonality", action="store_true", help="print the Gram-matrix defect; exit 0 iff <= 1e-12")
    p.add_argument("--quad-points", type=_int_in(2), help="Gauss-Legendre nodes for the check (default max(64, 2m))")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=run_basis)

    p = sub.add_parser("table", help="error table for given weights, without training")
    p.add_argument("--problem", required=True, help="built-in name or path to a problem JSON file")
    p.add_argument("--weights", type=_weights, required=True, help="comma-separated w_1,...,w_m")
    p.add_argument("--activation", choices=["tanh", "identity"], default="tanh", help="output activation (default tanh)")
    p.add_argument("--test-points", type=_int_in(1), default=19, help="test grid size k (default 19)")
    p.add_argument("--out", help="report path (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv", help="report format (default csv)")
    p.add_argument("--precision", choices=["full", "paper"], default="full", help="full round-trip digits or 4 decimals")
    p.set_defaults(func=run_table)
    return parser


def resolve_problem(ref: str) -> ProblemSpec:
    if ref in BUILTINS:
        return builtin(ref)
    path = Path(ref)
    if path.suffix.lower() == ".json" or os.sep in ref or path.exists():
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise UsageError(f"--problem: cannot read {ref}: {exc.strerror}")
        try:
            return load_problem(data)
        except (ProblemSchemaError, ExprSyntaxError) as exc:
            raise UsageError(f"--problem {ref}: {exc}")
    raise UsageError(f"--problem: {UnknownProblemError(ref, BUILTINS)}")


def _write(target: str | None, data: bytes) -> None:
    if target is None:
        return
    if target == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    Path(target).write_bytes(data)


def _fmt(v) -> str:
    return "none" if v is None else format(v, ".6e")


def run_solve(args) -> int:
    problem = resolve_problem(args.problem)
    try:
        config = TrainConfig(
            order=args.order,
            activation=args.activation,
            train_points=args.train_points,
            learning_rate=args.lr,
            max_iters=args.max_iters,
            loss_tol=args.tol,
            seed=args.seed,
            init_range=args.init_range,
            backtracking=not args.no_backtracking,
            sufficient_decrease=args.sufficient_decrease,
            stationarity_tol=args.stationarity_tol,
        )
    except SLNNError as exc:
        raise UsageError(str(exc))

    try:
        rep = train(problem, config)
    except DivergenceError as exc:
        print(f"slnn solve: diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED

    table = report.evaluate(
        rep.final_params, problem.conditions, problem, report.test_grid(problem, args.test_points), config
    )
    table = report.ErrorTable(
        table.rows,
        table.problem_name,
        config,
        training={
            "converged": rep.converged,
            "stop_reason": rep.stop_reason,
            "iterations": rep.iterations,
            "final_loss": rep.final_loss,
            "weights": [float(w) for w in rep.final_params.weights],
            "train_grid": list(rep.grid),
            "seed": rep.seed_used,
            "rng": rep.rng,
        },
    )
    try:
        max_err = report.summarize(table).max_abs_error
    except SLNNError:
        max_err = None

    _write(args.out, report.emit(table, args.format, args.precision))
    _write(args.loss_history, report.emit_loss_history(rep.loss_history))
    print(
        f"problem={problem.name} converged={str(rep.converged).lower()} iters={rep.iterations} "
        f"final_loss={_fmt(rep.final_loss)} max_err={_fmt(max_err)}",
        file=sys.stderr if args.out == "-" else sys.stdout,
    )
    return EXIT_OK if rep.converged else EXIT_NOT_CONVERGED


def gradient_discrepancy(analytic, numeric, abs_floor: float = 1e-9) -> float:
    """Worst entrywise relative difference; differences within ``abs_floor`` count as zero."""
    analytic = np.asarray(analytic, dtype=float)
    numeric = np.asarray(numeric, dtype=float)
    diff = np.abs(analytic - numeric)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    rel = np.where(diff <= abs_floor, 0.0, diff / np.where(scale > 0, scale, 1.0))
    return float(np.max(rel))


def gradcheck(problems, activations, order, train_points, trials, seed, step, weight_range, abs_floor):
    """Yield ``(problem, activation, trial, discrepancy)`` for seeded random configurations."""
    rng = np.random.Generator(np.random.PCG64(seed))
    for problem in problems:
        a, b = problem.domain
        for act in activations:
            for trial in range(trials):
                weights = rng.uniform(-weight_range, weight_range, order)
                grid = np.sort(a + (b - a) * rng.uniform(0.05, 1.0, train_points))
                params = NetworkParams(weights, act)
                g = loss_gradient(problem, problem.conditions, params, grid)
                fd = finite_diff_gradient(problem, problem.conditions, params, grid, step)
                yield problem, act, trial, gradient_discrepancy(g, fd, abs_floor)


def run_gradcheck(args) -> int:
    problems = [resolve_problem(args.problem)] if args.problem else [builtin(n) for n in BUILTINS]
    acts = ["tanh", "identity"] if args.activation == "both" else [args.activation]
    worst = 0.0
    where = None
    for problem, act, trial, d in gradcheck(
        problems, acts, args.order, args.train_points, args.trials, args.seed,
        args.step, args.weight_range, args.abs_floor,
    ):
        if d >= worst:
            worst, where = d, (problem.name, act, trial)
    ok = worst < args.tolerance
    print(
        f"gradcheck configs={len(problems) * len(acts) * args.trials} worst_rel={worst:.3e} "
        f"at={where[0]}/{where[1]}/trial{where[2]} tolerance={args.tolerance:g} "
        f"{'pass' if ok else 'fail'}"
    )
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def run_basis(args) -> int:
    m = args.order
    status = EXIT_OK
    if args.check_orthogonality:
        q = args.quad_points or max(64, 2 * m)
        if q < 2 * m:
            raise UsageError(f"--quad-points must be >= 2*order = {2 * m}")
        defect = legendre.orthogonality_defect(m, q)
        print(f"orthogonality_defect={defect:.3e} order={m} quad_points={q}")
        status = EXIT_OK if defect <= 1e-12 else EXIT_NOT_CONVERGED
        if args.out is None:
            return status

    grid = np.linspace(0.0, 1.0, args.points)
    tab = legendre.basis_table(m, grid)
    header = ["eta"] + [f"L_{k}" for k in range(m)]
    cols = [tab.values]
    if args.derivatives:
        header += [f"dL_{k}" for k in range(m)] + [f"d2L_{k}" for k in range(m)]
        cols += [tab.d1, tab.d2]
    body = np.hstack([grid[:, None]] + cols)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in body:
        w.writerow([format(v, ".17g") for v in row])
    data = buf.getvalue().encode("utf-8")
    _write(args.out if args.out is not None else "-", data)
    return status


def run_table(args) -> int:
    problem = resolve_problem(args.problem)
    if len(args.weights) > legendre.MAX_ORDER:
        raise UsageError("--weights: too many weights")
    params = NetworkParams(args.weights, args.activation)
    table = report.evaluate(params, problem.conditions, problem, report.test_grid(problem, args.test_points))
    _write(args.out if args.out is not None else "-", report.emit(table, args.format, args.precision))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"slnn {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"slnn {args.command}: diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
