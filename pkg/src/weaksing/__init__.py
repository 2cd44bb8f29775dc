"""Positive periodic solutions of ``u'' = h(t)/u^lam`` with a weak singularity.

``h`` is an indefinite (sign-changing), mean-negative T-periodic weight and
``0 < lam < 1``. Submodules: ``weights`` (forcing terms and their mean-zero
parts), ``fixedpoint`` and ``continuation`` (branch of solutions in the
parameter ``beta``), ``bounds`` (a-priori bounds and existence conditions),
``timemap`` (two-value weights by quadrature), ``odeshoot`` (direct
integration and shooting), ``transform`` (changes of variables and residuals).
"""
from ._backend import BACKEND
from .errors import *  # noqa: F401,F403
from .weights import (PiecewiseConstant, Sampled, MeanZeroWeight, decompose, mean_zero,
                      square_wave, two_value, equal_pieces, load_weight)
from .transform import PeriodicSolution, RhoSolution, residual_eq, beta_scale
from .fixedpoint import FixedPointSystem, FPState, Xi, seed_beta_zero, jacobian_sign
from .continuation import TraceOptions, Branch, trace_branch, classify_termination, solve_equation2
from .timemap import TwoValueProblem, solve_two_value, reconstruct, integral_I, integral_J
from .odeshoot import ShootState, integrate, shoot

__version__ = "0.1.0"
