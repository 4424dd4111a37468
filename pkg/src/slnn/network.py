"""Single-layer functional-link network over a shifted Legendre expansion.

The network output is ``N = act(C)`` with ``C = sum_i w_i L_{i-1}(eta)``.
All eta-derivatives and weight gradients are closed forms; nothing in here
differentiates numerically.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .legendre import BasisEval

__all__ = [
    "Activation",
    "NetworkParams",
    "NetOutput",
    "NetWeightGrads",
    "forward",
    "weight_gradients",
    "forward_with_gradients",
]


class Activation(str, enum.Enum):
    TANH = "tanh"
    IDENTITY = "identity"

    def derivatives(self, c):
        """Return ``act(c)`` and its first three derivatives."""
        if self is Activation.IDENTITY:
            zero = np.zeros_like(c, dtype=float)
            return np.asarray(c, dtype=float), zero + 1.0, zero, zero
        t = np.tanh(c)
        s1 = 1.0 - t * t
        s2 = -2.0 * t * s1
        s3 = -2.0 * s1 * (1.0 - 3.0 * t * t)
        return t, s1, s2, s3


@dataclass(frozen=True)
class NetworkParams:
    weights: np.ndarray
    activation: Activation = Activation.TANH

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size < 1:
            raise DimensionError("network needs at least one weight")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "activation", Activation(self.activation))

    @property
    def order(self) -> int:
        return self.weights.size

    def with_weights(self, weights) -> NetworkParams:
        return NetworkParams(weights, self.activation)

    def __eq__(self, other):
        if not isinstance(other, NetworkParams):
            return NotImplemented
        return self.activation is other.activation and np.array_equal(self.weights, other.weights)

    __hash__ = None


@dataclass(frozen=True)
class NetOutput:
    n: float | np.ndarray
    dn: float | np.ndarray
    d2n: float | np.ndarray


@dataclass(frozen=True)
class NetWeightGrads:
    dn_dw: np.ndarray
    ddn_dw: np.ndarray
    dd2n_dw: np.ndarray


def _check(params: NetworkParams, basis: BasisEval) -> None:
    if basis.order != params.order:
        raise DimensionError(
            f"basis has {basis.order} functions but the network has {params.order} weights"
        )


def _scalarize(x):
    return float(x) if np.ndim(x) == 0 else x


def _evaluate(params: NetworkParams, basis: BasisEval, with_grads: bool):
    _check(params, basis)
    w = params.weights
    c, c1, c2 = basis.values @ w, basis.d1 @ w, basis.d2 @ w
    a0, a1, a2, a3 = params.activation.derivatives(c)
    out = NetOutput(_scalarize(a0), _scalarize(a1 * c1), _scalarize(a2 * c1 * c1 + a1 * c2))
    if not with_grads:
        return out, None
    a1, a2, a3, c1, c2 = (np.asarray(v)[..., None] for v in (a1, a2, a3, c1, c2))
    L, dL, d2L = basis.values, basis.d1, basis.d2
    a2c1 = a2 * c1
    grads = NetWeightGrads(
        a1 * L,
        a2c1 * L + a1 * dL,
        (a3 * c1 * c1 + a2 * c2) * L + 2.0 * a2c1 * dL + a1 * d2L,
    )
    return out, grads


def forward(params: NetworkParams, basis: BasisEval) -> NetOutput:
    """N, dN/deta and d2N/deta2 at the point(s) carried by ``basis``."""
    return _evaluate(params, basis, False)[0]


def weight_gradients(params: NetworkParams, basis: BasisEval) -> NetWeightGrads:
    """Gradients of N, dN/deta and d2N/deta2 with respect to each weight.

    The weight axis is last, so a stacked basis gives arrays of shape ``(h, m)``.
    Differentiating ``d2N = act''(C) C'^2 + act'(C) C''`` in ``w_j`` gives
    ``act'''(C) L_j C'^2 + 2 act''(C) C' L_j' + act''(C) C'' L_j + act'(C) L_j''``.
    """
    return _evaluate(params, basis, True)[1]


def forward_with_gradients(params: NetworkParams, basis: BasisEval) -> tuple[NetOutput, NetWeightGrads]:
    return _evaluate(params, basis, True)
