"""Trial solution that satisfies the initial conditions for any weights.

    xi_t(eta) = g0 + g1 (eta - a) + (eta - a)^2 N(eta)

The network only has to fit the differential equation; ``xi_t(a) = g0`` and
``xi_t'(a) = g1`` hold structurally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .legendre import BasisEval
from .network import NetworkParams, forward_with_gradients

__all__ = ["IVPConditions", "TrialEval", "trial_eval"]


@dataclass(frozen=True)
class IVPConditions:
    a: float
    g0: float
    g1: float

    def __post_init__(self):
        for name in ("a", "g0", "g1"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"initial condition {name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class TrialEval:
    xi: float | np.ndarray
    dxi: float | np.ndarray
    d2xi: float | np.ndarray
    xi_dw: np.ndarray
    dxi_dw: np.ndarray
    d2xi_dw: np.ndarray


def _embed(t, n, dn, d2n):
    # (eta - a)^2 * N and its first two eta-derivatives
    return (
        t * t * n,
        2.0 * t * n + t * t * dn,
        2.0 * n + 4.0 * t * dn + t * t * d2n,
    )


def trial_eval(conds: IVPConditions, params: NetworkParams, basis: BasisEval, eta=None) -> TrialEval:
    """Trial value, eta-derivatives, and weight gradients of all three.

    ``eta`` defaults to the point(s) the basis was evaluated at.
    """
    if eta is None:
        eta = basis.eta
    t = np.asarray(eta, dtype=float) - conds.a
    if np.any(t < 0):
        raise DomainError(f"trial solution requested left of the initial point a={conds.a}")
    out, grads = forward_with_gradients(params, basis)

    v, dv, d2v = _embed(t, out.n, out.dn, out.d2n)
    tw = t[..., None]
    v_w, dv_w, d2v_w = _embed(tw, grads.dn_dw, grads.ddn_dw, grads.dd2n_dw)

    xi = conds.g0 + conds.g1 * t + v
    dxi = conds.g1 + dv
    if np.ndim(xi) == 0:
        xi, dxi, d2v = float(xi), float(dxi), float(d2v)
    return TrialEval(xi, dxi, d2v, v_w, dv_w, d2v_w)
