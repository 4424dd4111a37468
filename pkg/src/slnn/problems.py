"""Singular initial value problems of Lane-Emden type.

Every problem is held in the explicit form

    xi'' = f(eta, xi, xi') = forcing(eta) - g(eta, xi) - (s / eta) xi'

on ``[a, b]`` with ``xi(a) = g0`` and ``xi'(a) = g1``.  The classical
Lane-Emden family has ``s = 2`` and ``a = 0``; the singular point itself is
never collocated.

Built-in ``example2`` is the *corrected* form of the commonly printed problem

    xi'' + (2/eta) xi' + xi = 6 + 12 eta + 2 eta^2 + eta^3,  xi(0) = 1, xi'(0) = 0

whose stated exact solution ``eta^2 + eta^3`` does not satisfy it: substituting
gives ``(2 + 6 eta) + (4 + 6 eta) + eta^2 + eta^3 = 6 + 12 eta + eta^2 + eta^3``
(a single ``eta^2``), and the solution starts at ``xi(0) = 0``.  The built-in
uses that forcing and ``xi(0) = 0`` so the exact solution is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import expr as ex
from .errors import (
    DomainError,
    ExprSyntaxError,
    ProblemSchemaError,
    SingularityError,
    UnknownProblemError,
)
from .trial import IVPConditions, TrialEval

__all__ = [
    "ProblemSpec",
    "ResidualEval",
    "BUILTINS",
    "builtin",
    "load_problem",
    "dump_problem",
    "residual",
    "ResidualKernel",
    "exact_value",
]


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    g: ex.Expr
    forcing: ex.Expr
    domain: tuple[float, float]
    conditions: IVPConditions
    singular_coefficient: float = 2.0
    exact: Optional[ex.Expr] = None
    dg_dxi: ex.Expr = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a, b = (float(v) for v in self.domain)
        object.__setattr__(self, "domain", (a, b))
        object.__setattr__(self, "singular_coefficient", float(self.singular_coefficient))
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ProblemSchemaError("domain", "endpoints must be finite")
        if a < 0:
            raise ProblemSchemaError("domain", "a >= 0 required")
        if not a < b:
            raise ProblemSchemaError("domain", "a < b required")
        if b > 1:
            raise ProblemSchemaError("domain", "b <= 1 required (the basis lives on [0, 1])")
        if self.conditions.a != a:
            raise ProblemSchemaError("conditions", "initial point must equal the left endpoint")
        if not math.isfinite(self.singular_coefficient):
            raise ProblemSchemaError("singular_coefficient", "must be finite")
        for label, node, allowed in (
            ("g", self.g, {"eta", "xi"}),
            ("forcing", self.forcing, {"eta"}),
            ("exact", self.exact, {"eta"}),
        ):
            if node is None:
                continue
            extra = ex.variables(node) - allowed
            if extra:
                raise ProblemSchemaError(label, f"may not reference {', '.join(sorted(extra))}")
        object.__setattr__(self, "dg_dxi", ex.differentiate_xi(self.g))

    @classmethod
    def from_sources(
        cls,
        name: str,
        g: str,
        forcing: str,
        domain,
        initial_value: float,
        initial_slope: float,
        singular_coefficient: float = 2.0,
        exact: str | None = None,
    ) -> ProblemSpec:
        a = float(domain[0])
        return cls(
            name=name,
            g=ex.parse(g),
            forcing=ex.parse(forcing),
            domain=(a, float(domain[1])),
            conditions=IVPConditions(a, initial_value, initial_slope),
            singular_coefficient=singular_coefficient,
            exact=None if exact is None else ex.parse(exact),
        )

    @property
    def a(self) -> float:
        return self.domain[0]

    @property
    def b(self) -> float:
        return self.domain[1]


@dataclass(frozen=True)
class ResidualEval:
    r: float | np.ndarray
    df_dxi: float | np.ndarray
    df_ddxi: float | np.ndarray


BUILTINS = {
    "example1": dict(
        g="xi^5",
        forcing="0",
        domain=(0.0, 1.0),
        initial_value=1.0,
        initial_slope=0.0,
        exact="(1 + eta^2/3)^(-1/2)",
    ),
    "example2": dict(
        g="xi",
        forcing="6 + 12*eta + eta^2 + eta^3",
        domain=(0.0, 1.0),
        initial_value=0.0,
        initial_slope=0.0,
        exact="eta^2 + eta^3",
    ),
}


def builtin(name: str) -> ProblemSpec:
    try:
        fields = BUILTINS[name]
    except KeyError:
        raise UnknownProblemError(name, BUILTINS) from None
    return ProblemSpec.from_sources(name=name, **fields)


_REQUIRED = ("name", "g", "forcing", "domain", "initial_value", "initial_slope")
_OPTIONAL = ("singular_coefficient", "exact")


def _number(doc, key):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ProblemSchemaError(key, f"expected a number, got {type(v).__name__}")
    if not math.isfinite(v):
        raise ProblemSchemaError(key, "must be finite")
    return float(v)


def _expression(doc, key):
    v = doc[key]
    if not isinstance(v, str):
        raise ProblemSchemaError(key, f"expected an expression string, got {type(v).__name__}")
    try:
        return ex.parse(v)
    except ExprSyntaxError as exc:
        # keep the concrete error type, add the field path
        exc.field = key
        exc.args = (f"{key}: {exc.args[0]}",)
        raise


def load_problem(file_contents: str | bytes) -> ProblemSpec:
    """Parse and validate a problem JSON document."""
    if isinstance(file_contents, bytes):
        try:
            file_contents = file_contents.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ProblemSchemaError("$", f"not UTF-8 ({exc.reason} at byte {exc.start})") from exc
    try:
        doc = json.loads(file_contents)
    except json.JSONDecodeError as exc:
        raise ProblemSchemaError("$", f"invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ProblemSchemaError("$", "top level must be an object")
    unknown = sorted(set(doc) - set(_REQUIRED) - set(_OPTIONAL))
    if unknown:
        raise ProblemSchemaError(unknown[0], "unknown field")
    for key in _REQUIRED:
        if key not in doc:
            raise ProblemSchemaError(key, "required field missing")

    if not isinstance(doc["name"], str) or not doc["name"]:
        raise ProblemSchemaError("name", "expected a non-empty string")
    dom = doc["domain"]
    if not isinstance(dom, list) or len(dom) != 2:
        raise ProblemSchemaError("domain", "expected [a, b]")
    a = _number({"domain[0]": dom[0]}, "domain[0]")
    b = _number({"domain[1]": dom[1]}, "domain[1]")
    if not a < b:
        raise ProblemSchemaError("domain", "a < b required")
    g = _expression(doc, "g")
    forcing = _expression(doc, "forcing")
    exact = None
    if doc.get("exact") is not None:
        exact = _expression(doc, "exact")
    s = _number(doc, "singular_coefficient") if "singular_coefficient" in doc else 2.0

    return ProblemSpec(
        name=doc["name"],
        g=g,
        forcing=forcing,
        domain=(a, b),
        conditions=IVPConditions(a, _number(doc, "initial_value"), _number(doc, "initial_slope")),
        singular_coefficient=s,
        exact=exact,
    )


def problem_to_dict(problem: ProblemSpec) -> dict:
    return {
        "name": problem.name,
        "singular_coefficient": problem.singular_coefficient,
        "g": ex.to_source(problem.g),
        "forcing": ex.to_source(problem.forcing),
        "domain": list(problem.domain),
        "initial_value": problem.conditions.g0,
        "initial_slope": problem.conditions.g1,
        "exact": None if problem.exact is None else ex.to_source(problem.exact),
    }


def dump_problem(problem: ProblemSpec) -> str:
    return json.dumps(problem_to_dict(problem), indent=2) + "\n"


def _check_points(problem: ProblemSpec, eta) -> np.ndarray:
    pts = np.asarray(eta, dtype=float)
    if np.any(pts == 0.0):
        raise SingularityError("the term (s/eta) xi' is undefined at eta = 0")
    a, b = problem.domain
    if np.any((pts < a) | (pts > b)):
        raise DomainError(f"eta outside the problem domain [{a}, {b}]")
    return pts


class ResidualKernel:
    """Residual at a fixed set of points; the eta-only terms are computed once."""

    def __init__(self, problem: ProblemSpec, eta):
        self.problem = problem
        self.eta = _check_points(problem, eta)
        self.s_over_eta = problem.singular_coefficient / self.eta
        self.forcing = ex.evaluate(problem.forcing, self.eta, 0.0)

    def __call__(self, trial: TrialEval) -> ResidualEval:
        p = self.problem
        f = self.forcing - ex.evaluate(p.g, self.eta, trial.xi) - self.s_over_eta * trial.dxi
        r = trial.d2xi - f
        df_dxi = ex.evaluate(p.dg_dxi, self.eta, trial.xi)
        df_ddxi = -self.s_over_eta
        if np.ndim(r) == 0:
            return ResidualEval(float(r), float(df_dxi), float(df_ddxi))
        return ResidualEval(r, df_dxi, df_ddxi)


def residual(problem: ProblemSpec, eta, trial: TrialEval) -> ResidualEval:
    """``xi_t'' - f(eta, xi_t, xi_t')`` and the partials the loss gradient needs.

    ``df_dxi`` is dg/dxi evaluated on the trial value; ``f`` itself carries
    ``-g`` so the caller adds it with a plus sign when differentiating ``r``.
    """
    return ResidualKernel(problem, eta)(trial)


def exact_value(problem: ProblemSpec, eta):
    """Closed-form solution at ``eta``, or ``None`` when the problem has none."""
    if problem.exact is None:
        return None
    return ex.evaluate(problem.exact, eta, 0.0)
