"""Collocation loss, its analytic gradient, and the gradient-descent loop.

The loss is half the sum of squared ODE residuals of the trial solution over
a fixed grid.  Its gradient is assembled by the chain rule from the closed-form
weight gradients of the trial solution:

    dE/dw_j = sum_i r_i * (d2xi_dw_j + dg/dxi * xi_dw_j + (s/eta_i) * dxi_dw_j)

Weights are drawn from numpy's PCG64 generator seeded with ``TrainConfig.seed``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DivergenceError, InvalidArgumentError
from .legendre import basis_table, check_order
from .network import Activation, NetworkParams
from .problems import ProblemSpec, ResidualKernel
from .trial import IVPConditions, trial_eval

__all__ = [
    "RNG_ALGORITHM",
    "TrainConfig",
    "TrainReport",
    "Objective",
    "make_grid",
    "loss",
    "loss_gradient",
    "finite_diff_gradient",
    "initial_weights",
    "train",
]

log = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass(frozen=True)
class TrainConfig:
    order: int = 5
    activation: Activation = Activation.TANH
    train_points: int = 10
    learning_rate: float = 0.01
    max_iters: int = 50_000
    loss_tol: float = 1e-12
    seed: int = 0
    init_range: float = 0.5
    backtracking: bool = True
    sufficient_decrease: float = 0.5
    stationarity_tol: float = 5e-3

    def __post_init__(self):
        object.__setattr__(self, "order", check_order(self.order))
        object.__setattr__(self, "activation", Activation(self.activation))
        if self.train_points < 2:
            raise InvalidArgumentError("train_points must be >= 2")
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise InvalidArgumentError("learning_rate must be a positive finite number")
        if self.max_iters < 1:
            raise InvalidArgumentError("max_iters must be >= 1")
        if not self.loss_tol >= 0:
            raise InvalidArgumentError("loss_tol must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
        if not (self.init_range > 0 and math.isfinite(self.init_range)):
            raise InvalidArgumentError("init_range must be a positive finite number")
        if not 0 <= self.sufficient_decrease <= 1:
            raise InvalidArgumentError("sufficient_decrease must lie in [0, 1]")
        if not self.stationarity_tol >= 0:
            raise InvalidArgumentError("stationarity_tol must be non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["activation"] = self.activation.value
        return d


@dataclass(frozen=True)
class TrainReport:
    final_params: NetworkParams
    loss_history: tuple[float, ...]
    iterations: int
    converged: bool
    grid: tuple[float, ...]
    seed_used: int
    rng: str = RNG_ALGORITHM
    stop_reason: str = "max_iters"

    @property
    def final_loss(self) -> float:
        return self.loss_history[-1]


def make_grid(problem: ProblemSpec, h: int) -> np.ndarray:
    """``h`` equispaced points in ``(a, b]``; the left endpoint is excluded."""
    if int(h) != h or h < 2:
        raise InvalidArgumentError(f"need at least 2 collocation points, got {h!r}")
    a, b = problem.domain
    grid = a + (b - a) * np.arange(1, h + 1) / h
    grid[-1] = b
    return grid


class Objective:
    """Loss and gradient over a fixed grid, with the basis evaluated once."""

    def __init__(self, problem: ProblemSpec, conds: IVPConditions, grid, order: int, activation):
        self.problem = problem
        self.conds = conds
        self.grid = np.asarray(grid, dtype=float)
        self.activation = Activation(activation)
        self.basis = basis_table(order, self.grid)
        self.kernel = ResidualKernel(problem, self.grid)

    def _params(self, weights) -> NetworkParams:
        return NetworkParams(weights, self.activation)

    def residuals(self, weights) -> np.ndarray:
        te = trial_eval(self.conds, self._params(weights), self.basis)
        return self.kernel(te).r

    def loss(self, weights) -> float:
        r = self.residuals(weights)
        return float(0.5 * np.sum(r * r))

    def jacobian(self, weights) -> tuple[np.ndarray, np.ndarray]:
        """Residuals ``r`` (shape ``(h,)``) and ``dr/dw`` (shape ``(h, m)``)."""
        te = trial_eval(self.conds, self._params(weights), self.basis)
        res = self.kernel(te)
        dr_dw = (
            te.d2xi_dw
            + res.df_dxi[:, None] * te.xi_dw
            - res.df_ddxi[:, None] * te.dxi_dw
        )
        return res.r, dr_dw

    def loss_and_gradient(self, weights) -> tuple[float, np.ndarray]:
        r, dr_dw = self.jacobian(weights)
        return float(0.5 * np.sum(r * r)), r @ dr_dw

    def evaluate(self, weights) -> tuple[float, np.ndarray, float]:
        """Loss, gradient, and the stationarity measure used as a stopping test.

        Stationarity is the largest cosine between the residual vector and a
        column of ``dr/dw``.  It tends to 0 at a minimum with nonzero residual
        and stays O(1) while a consistent fit is still closing in on ``r = 0``.
        """
        r, dr_dw = self.jacobian(weights)
        grad = r @ dr_dw
        denom = np.sqrt(np.sum(dr_dw * dr_dw, axis=0)) * np.sqrt(np.sum(r * r))
        with np.errstate(divide="ignore", invalid="ignore"):
            cos = np.where(denom > 0, np.abs(grad) / denom, 0.0)
        return float(0.5 * np.sum(r * r)), grad, float(np.max(cos))


def _objective(problem, conds, params: NetworkParams, grid) -> Objective:
    return Objective(problem, conds, grid, params.order, params.activation)


def loss(problem: ProblemSpec, conds: IVPConditions, params: NetworkParams, grid) -> float:
    return _objective(problem, conds, params, grid).loss(params.weights)


def loss_gradient(problem: ProblemSpec, conds: IVPConditions, params: NetworkParams, grid) -> np.ndarray:
    return _objective(problem, conds, params, grid).loss_and_gradient(params.weights)[1]


def finite_diff_gradient(
    problem: ProblemSpec, conds: IVPConditions, params: NetworkParams, grid, step: float = 1e-6
) -> np.ndarray:
    """Central differences of :func:`loss` in each weight."""
    if not 0 < step <= 1e-3:
        raise InvalidArgumentError(f"step must lie in (0, 1e-3], got {step!r}")
    obj = _objective(problem, conds, params, grid)
    w0 = params.weights
    out = np.empty(w0.size)
    for j in range(w0.size):
        wp = w0.copy()
        wm = w0.copy()
        wp[j] += step
        wm[j] -= step
        out[j] = (obj.loss(wp) - obj.loss(wm)) / (2.0 * step)
    return out


def initial_weights(config: TrainConfig) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(config.seed))
    return rng.uniform(-config.init_range, config.init_range, config.order)


def _evaluate(obj: Objective, w: np.ndarray):
    """Loss, gradient, stationarity; ``(inf, None, nan)`` when anything is non-finite."""
    if not np.all(np.isfinite(w)):
        return math.inf, None, math.nan
    with np.errstate(over="ignore", invalid="ignore"):
        E, grad, cos = obj.evaluate(w)
    if not (math.isfinite(E) and np.all(np.isfinite(grad))):
        return math.inf, None, math.nan
    return E, grad, cos


def train(problem: ProblemSpec, config: TrainConfig, weights=None) -> TrainReport:
    """Gradient descent ``w <- w - rate * dE/dw`` from a seeded start.

    With ``config.backtracking`` a trial step is accepted once
    ``E_new <= E - c * rate * |dE/dw|^2`` (``c = config.sufficient_decrease``;
    ``c = 0`` accepts any step that does not raise the loss), otherwise the
    rate is halved and the step retried.  After an accepted step the rate grows
    by 1.5, capped at ``config.learning_rate``.

    Training stops when the loss reaches ``loss_tol`` or the stationarity
    measure of :meth:`Objective.evaluate` reaches ``stationarity_tol`` (both
    count as converged), when ``max_iters`` steps have been taken, or when the
    step no longer moves the weights.
    ``weights`` overrides the seeded initialization.
    """
    grid = make_grid(problem, config.train_points)
    obj = Objective(problem, problem.conditions, grid, config.order, config.activation)
    w = initial_weights(config) if weights is None else np.array(weights, dtype=float)
    E, grad, cos = _evaluate(obj, w)
    if grad is None:
        raise DivergenceError(0, w.copy(), math.nan)
    history = [E]
    rate = config.learning_rate
    it = 0

    while True:
        if E <= config.loss_tol:
            reason = "loss_tol"
            break
        if cos <= config.stationarity_tol:
            reason = "stationary"
            break
        if it >= config.max_iters:
            reason = "max_iters"
            break
        if config.backtracking:
            decrease = config.sufficient_decrease * float(grad @ grad)
            while True:
                w_new = w - rate * grad
                if np.array_equal(w_new, w):
                    break
                E_new, grad_new, cos_new = _evaluate(obj, w_new)
                if E_new <= E - decrease * rate:
                    break
                rate *= 0.5
            if np.array_equal(w_new, w):
                reason = "step_underflow"
                log.info("step underflow at iteration %d, loss %.3e", it, E)
                break
            rate = min(rate * 1.5, config.learning_rate)
        else:
            w_new = w - rate * grad
            E_new, grad_new, cos_new = _evaluate(obj, w_new)
            if grad_new is None:
                raise DivergenceError(it + 1, w.copy(), E)
        w, E, grad, cos = w_new, E_new, grad_new, cos_new
        it += 1
        history.append(E)

    return TrainReport(
        final_params=NetworkParams(w, config.activation),
        loss_history=tuple(history),
        iterations=it,
        converged=reason in ("loss_tol", "stationary"),
        grid=tuple(float(x) for x in grid),
        seed_used=config.seed,
        stop_reason=reason,
    )
