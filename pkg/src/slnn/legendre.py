"""Shifted Legendre polynomials on [0, 1] with first and second derivatives.

``L_k(eta) = P_k(2*eta - 1)`` where ``P_k`` is the classical Legendre
polynomial on [-1, 1].  Values and derivatives come out of one forward sweep
of the three-term recurrence

    (k + 1) L_{k+1} = (2k + 1) (2 eta - 1) L_k - k L_{k-1}

differentiated term by term (the ``d/deta`` of ``2 eta - 1`` is 2).

The recurrence is often printed with ``P_k`` on the left-hand side; that is a
misprint, the left-hand side is always the *next* polynomial ``P_{k+1}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidArgumentError, InvalidOrderError

__all__ = [
    "MAX_ORDER",
    "BasisEval",
    "check_order",
    "eval_basis",
    "eval_basis_grid",
    "basis_table",
    "gauss_legendre",
    "orthogonality_defect",
]

MAX_ORDER = 64


@dataclass(frozen=True)
class BasisEval:
    """``L_0..L_{m-1}`` and their eta-derivatives.

    For a single point the arrays have shape ``(m,)``; :func:`basis_table`
    returns the stacked form with shape ``(h, m)`` and ``eta`` of shape ``(h,)``.
    Everything downstream broadcasts over the leading axis.
    """

    eta: float | np.ndarray
    values: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    @property
    def order(self) -> int:
        return self.values.shape[-1]


def check_order(m: int, max_order: int = MAX_ORDER) -> int:
    if isinstance(m, bool) or int(m) != m:
        raise InvalidOrderError(f"basis order must be an integer, got {m!r}")
    m = int(m)
    if m < 1:
        raise InvalidOrderError(f"basis order must be >= 1, got {m}")
    if m > max_order:
        raise InvalidOrderError(f"basis order {m} exceeds the ceiling {max_order}")
    return m


def _sweep(m: int, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = 2.0 * eta - 1.0
    shape = eta.shape + (m,)
    val = np.zeros(shape)
    d1 = np.zeros(shape)
    d2 = np.zeros(shape)
    val[..., 0] = 1.0
    if m > 1:
        val[..., 1] = x
        d1[..., 1] = 2.0
    for k in range(1, m - 1):
        a = 2 * k + 1
        val[..., k + 1] = (a * x * val[..., k] - k * val[..., k - 1]) / (k + 1)
        d1[..., k + 1] = (a * (2.0 * val[..., k] + x * d1[..., k]) - k * d1[..., k - 1]) / (k + 1)
        d2[..., k + 1] = (a * (4.0 * d1[..., k] + x * d2[..., k]) - k * d2[..., k - 1]) / (k + 1)
    return val, d1, d2


def eval_basis(m: int, eta: float) -> BasisEval:
    """Evaluate ``L_k``, ``L_k'`` and ``L_k''`` for ``k < m`` at one point in [0, 1]."""
    m = check_order(m)
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"eta={eta!r} outside [0, 1]")
    val, d1, d2 = _sweep(m, np.asarray(eta))
    return BasisEval(eta, val, d1, d2)


def _check_grid(grid) -> np.ndarray:
    pts = np.asarray(grid, dtype=float).reshape(-1)
    bad = np.flatnonzero(~((pts >= 0.0) & (pts <= 1.0)))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"grid point {i} (eta={pts[i]!r}) outside [0, 1]")
    return pts


def basis_table(m: int, grid) -> BasisEval:
    """Stacked evaluation over a grid: arrays of shape ``(len(grid), m)``."""
    m = check_order(m)
    pts = _check_grid(grid)
    val, d1, d2 = _sweep(m, pts)
    return BasisEval(pts, val, d1, d2)


def eval_basis_grid(m: int, grid) -> list[BasisEval]:
    """Pointwise evaluations, one :class:`BasisEval` per grid point, in input order."""
    table = basis_table(m, grid)
    return [
        BasisEval(float(e), table.values[i], table.d1[i], table.d2[i])
        for i, e in enumerate(table.eta)
    ]


def _legendre_and_slope(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(1, n):
        p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
    if n == 1:
        return p1, np.ones_like(x)
    return p1, n * (x * p1 - p0) / (x * x - 1.0)


def gauss_legendre(n: int, a: float = 0.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes and weights on [a, b].

    Roots of ``P_n`` are found by Newton iteration from the Tricomi-style
    initial guesses ``cos(pi (i - 1/4) / (n + 1/2))``.
    """
    if n < 1:
        raise InvalidArgumentError("need at least one quadrature node")
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_slope(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    _, dp = _legendre_and_slope(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def orthogonality_defect(m: int, quadrature_points: int) -> float:
    """max_{j,k<m} |int_0^1 L_j L_k - delta_jk / (2j + 1)| by Gauss-Legendre quadrature."""
    m = check_order(m)
    if quadrature_points < 2 * m:
        raise InvalidArgumentError(
            f"quadrature_points={quadrature_points} < 2*m={2 * m}; products are not integrated exactly"
        )
    nodes, weights = gauss_legendre(quadrature_points)
    vals = basis_table(m, nodes).values
    gram = vals.T @ (weights[:, None] * vals)
    target = np.diag(1.0 / (2.0 * np.arange(m) + 1.0))
    return float(np.max(np.abs(gram - target)))
