"""Error tables on a test grid, summary statistics, and CSV/JSON output."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InvalidArgumentError, NotComputableError
from .legendre import basis_table
from .network import NetworkParams
from .problems import ProblemSpec, exact_value
from .training import TrainConfig
from .trial import IVPConditions, trial_eval

__all__ = [
    "ErrorRow",
    "ErrorTable",
    "Summary",
    "test_grid",
    "evaluate",
    "summarize",
    "emit",
    "read_csv",
    "emit_loss_history",
]

CSV_HEADER = ("eta", "exact", "slnn", "abs_error")


@dataclass(frozen=True)
class ErrorRow:
    eta: float
    exact: Optional[float]
    approx: float
    abs_error: Optional[float]


@dataclass(frozen=True)
class ErrorTable:
    rows: tuple[ErrorRow, ...]
    problem_name: str
    config_echo: Optional[TrainConfig] = None
    training: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        etas = [r.eta for r in self.rows]
        if any(b <= a for a, b in zip(etas, etas[1:])):
            raise ValueError("error table rows must be strictly increasing in eta")


@dataclass(frozen=True)
class Summary:
    max_abs_error: float
    rmse: float
    n_points: int


def test_grid(problem: ProblemSpec, k: int = 19) -> np.ndarray:
    """``k`` equispaced points in ``(a, b]``; ``k = 19`` on [0, 1] gives ``i/19``."""
    if int(k) != k or k < 1:
        raise InvalidArgumentError(f"test grid needs k >= 1, got {k!r}")
    a, b = problem.domain
    grid = a + (b - a) * np.arange(1, k + 1) / k
    grid[-1] = b
    return grid


test_grid.__test__ = False  # keep pytest from collecting it when imported into tests


def evaluate(
    model: NetworkParams,
    conds: IVPConditions,
    problem: ProblemSpec,
    grid: Sequence[float],
    config: TrainConfig | None = None,
) -> ErrorTable:
    """Trial solution at each grid point next to the exact solution, if known."""
    pts = np.asarray(grid, dtype=float)
    a, b = problem.domain
    if np.any((pts <= a) | (pts > b)):
        raise DomainError(f"test points must lie in ({a}, {b}]")
    approx = np.atleast_1d(trial_eval(conds, model, basis_table(model.order, pts)).xi)
    exact = exact_value(problem, pts)
    rows = []
    for i, eta in enumerate(pts):
        ex = None if exact is None else float(exact[i])
        ap = float(approx[i])
        rows.append(ErrorRow(float(eta), ex, ap, None if ex is None else abs(ex - ap)))
    return ErrorTable(tuple(rows), problem.name, config)


def summarize(table: ErrorTable) -> Summary:
    errs = [r.abs_error for r in table.rows if r.abs_error is not None]
    if not errs:
        raise NotComputableError("no exact solution values in the table; errors are undefined")
    e = np.asarray(errs)
    return Summary(float(np.max(e)), float(math.sqrt(np.mean(e * e))), len(errs))


def _fmt_full(v: Optional[float]) -> str:
    return "" if v is None else format(v, ".17g")


def _fmt_paper(v: Optional[float], error: bool = False) -> str:
    if v is None:
        return ""
    if error and v != 0 and abs(v) < 1e-3:
        return format(v, ".4E")
    return format(v, ".4f")


def _csv(table: ErrorTable, precision: str) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in table.rows:
        if precision == "paper":
            w.writerow([_fmt_paper(r.eta), _fmt_paper(r.exact), _fmt_paper(r.approx),
                        _fmt_paper(r.abs_error, error=True)])
        else:
            w.writerow([_fmt_full(r.eta), _fmt_full(r.exact), _fmt_full(r.approx),
                        _fmt_full(r.abs_error)])
    return buf.getvalue().encode("utf-8")


def _json(table: ErrorTable) -> bytes:
    try:
        summary = summarize(table)
        summary_doc = {
            "max_abs_error": summary.max_abs_error,
            "rmse": summary.rmse,
            "n_points": summary.n_points,
        }
    except NotComputableError:
        summary_doc = None
    doc = {
        "problem": table.problem_name,
        "config": None if table.config_echo is None else table.config_echo.to_dict(),
        "training": table.training,
        "summary": summary_doc,
        "rows": [
            {"eta": r.eta, "exact": r.exact, "slnn": r.approx, "abs_error": r.abs_error}
            for r in table.rows
        ],
    }
    return (json.dumps(doc, indent=2, allow_nan=False) + "\n").encode("utf-8")


def emit(table: ErrorTable, format: str = "csv", precision: str = "full") -> bytes:
    """Serialize a table.  ``precision="paper"`` rounds CSV output to 4 decimals."""
    if precision not in ("full", "paper"):
        raise InvalidArgumentError(f"unknown precision {precision!r}")
    if format == "csv":
        return _csv(table, precision)
    if format == "json":
        return _json(table)
    raise InvalidArgumentError(f"unknown format {format!r}")


def read_csv(data: bytes) -> list[ErrorRow]:
    """Inverse of the full-precision CSV emitter."""
    reader = csv.reader(io.StringIO(data.decode("utf-8")))
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected header {header!r}")
    opt = lambda s: None if s == "" else float(s)  # noqa: E731
    return [ErrorRow(float(e), opt(x), float(a), opt(d)) for e, x, a, d in reader]


def emit_loss_history(history: Sequence[float]) -> bytes:
    lines = ["iter,loss"]
    lines += [f"{i},{format(v, '.17g')}" for i, v in enumerate(history)]
    return ("\n".join(lines) + "\n").encode("utf-8")
