"""Shifted Legendre functional-link network for Lane-Emden type singular IVPs.

A single-layer network ``N = tanh(sum_i w_i L_{i-1}(eta))`` over shifted
Legendre polynomials is embedded in the trial solution
``xi_t = g0 + g1 (eta - a) + (eta - a)^2 N`` and trained by gradient descent
on the collocation residual of ``xi'' + (s/eta) xi' + g(eta, xi) = f(eta)``.
"""

from .errors import SLNNError
from .expr import parse as parse_expr
from .legendre import BasisEval, basis_table, eval_basis, eval_basis_grid, orthogonality_defect
from .network import Activation, NetworkParams, forward, weight_gradients
from .problems import ProblemSpec, builtin, exact_value, load_problem, residual
from .report import emit, evaluate, summarize, test_grid
from .training import TrainConfig, TrainReport, finite_diff_gradient, loss, loss_gradient, make_grid, train
from .trial import IVPConditions, trial_eval

__version__ = "0.1.0"
