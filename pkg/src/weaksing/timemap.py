"""Semi-analytic periodic solutions for two-value weights.

For ``h = h1`` on ``[0, eta)`` and ``-h2`` on ``[eta, T)`` a periodic
solution has its minimum ``m`` at ``eta/2``, its maximum ``M`` at
``(eta+T)/2`` and ``u(0) = u(eta) = U``. The energy identity on each piece
turns the travel times into

    I(m, U) = int_m^U ds / sqrt(s^p - m^p)  = (eta/2)     sqrt(2 h1/p),
    J(U, M) = int_U^M ds / sqrt(M^p - s^p)  = ((T-eta)/2) sqrt(2 h2/p),

``p = 1 - lam``, and matching ``u'(eta)`` gives
``(h1 + h2) U^p = h1 m^p + h2 M^p``. Given ``m`` the first relation fixes
``U``, matching fixes ``M``; the second relation is then a scalar equation
in ``m``, solved by a bracketing sweep and Brent's method.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ._backend import kernels
from .bounds import bound_m_rho
from .errors import BadMean, BadParameter, NoRoot, QuadratureError
from .transform import PeriodicSolution, SolutionMeta
from .weights import PiecewiseConstant, two_value

__all__ = ["TwoValueProblem", "TimeMapSolution", "integral_I", "integral_J", "solve_two_value",
           "reconstruct", "from_weight"]

GAUSS_ORDER = 32
MAX_DOUBLINGS = 16
QUAD_TOL = 1e-12
N_SWEEP = 80

_XG, _WG = np.polynomial.legendre.leggauss(GAUSS_ORDER)


@dataclass(frozen=True)
class TwoValueProblem:
    lam: float
    T: float
    eta: float
    h1: float
    h2: float

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise BadParameter("lambda must lie in (0, 1)")
        if not (self.T > 0 and 0 < self.eta < self.T):
            raise BadParameter("need T > 0 and 0 < eta < T")
        if not (self.h1 > 0 and self.h2 > 0):
            raise BadParameter("h1 and h2 must be positive")

    @property
    def mean(self) -> float:
        return (self.h1 * self.eta - self.h2 * (self.T - self.eta)) / self.T

    @property
    def weight(self) -> PiecewiseConstant:
        return two_value(self.h1, self.h2, self.eta, self.T)

    def time_targets(self):
        p = 1 - self.lam
        return (0.5 * self.eta * math.sqrt(2 * self.h1 / p),
                0.5 * (self.T - self.eta) * math.sqrt(2 * self.h2 / p))


@dataclass(frozen=True)
class TimeMapSolution:
    problem: TwoValueProblem
    m: float
    M: float
    u_eta: float
    residuals: tuple
    n_roots: int = 1
    roots: tuple = field(default=(), repr=False)

    @property
    def t_min(self):
        return self.problem.eta / 2

    @property
    def t_max(self):
        return (self.problem.eta + self.problem.T) / 2

    def matching_defect(self) -> float:
        """Relative defect of ``(h1+h2) U^p = h1 m^p + h2 M^p``."""
        pr = self.problem
        p = 1 - pr.lam
        lhs = (pr.h1 + pr.h2) * self.u_eta ** p
        return abs(lhs - pr.h1 * self.m ** p - pr.h2 * self.M ** p) / lhs

    def summary(self):
        return {"m": self.m, "M": self.M, "u_eta": self.u_eta, "residuals": list(self.residuals),
                "n_roots": self.n_roots, "roots": [list(r) for r in self.roots]}


def _quad(kind, anchor, W, lam):
    val, st = kernels.quad_w(kind, float(anchor), float(W), float(lam), _XG, _WG, QUAD_TOL,
                             MAX_DOUBLINGS)
    if st < 0:
        raise QuadratureError(f"no convergence (kind={kind}, anchor={anchor:g}, W={W:g})")
    return val


def integral_I(m, U, lam) -> float:
    """``int_m^U (s^(1-lam) - m^(1-lam))^(-1/2) ds`` via ``s = m + w^2``."""
    if not (0 < lam < 1 and 0 <= m <= U and math.isfinite(U)):
        raise BadParameter("need 0 <= m <= U and lambda in (0, 1)")
    return _quad(kernels.KIND_I, m, math.sqrt(U - m), lam)


def integral_J(L, M, lam) -> float:
    """``int_L^M (M^(1-lam) - s^(1-lam))^(-1/2) ds`` via ``s = M - w^2``."""
    if not (0 < lam < 1 and 0 <= L <= M and M > 0 and math.isfinite(M)):
        raise BadParameter("need 0 <= L <= M, M > 0 and lambda in (0, 1)")
    return _quad(kernels.KIND_J, M, math.sqrt(M - L), lam)


def _invert(kind, anchor, targets, lam, wmax):
    w, st = kernels.invert_w(kind, float(anchor), np.asarray(targets, dtype=float), float(lam),
                             float(wmax), _XG, _WG, QUAD_TOL, MAX_DOUBLINGS)
    if st:
        raise QuadratureError("quadrature failed during inversion")
    return w


def _U_of_m(m, lam, c1):
    """``U > m`` with ``I(m, U) = c1``."""
    wmax = max(1.0, math.sqrt(m))
    while _quad(kernels.KIND_I, m, wmax, lam) < c1:
        wmax *= 2.0
    w = _invert(kernels.KIND_I, m, [c1], lam, wmax)[0]
    return m + w * w


def _branch(m, pr: TwoValueProblem):
    p = 1 - pr.lam
    c1, c2 = pr.time_targets()
    U = _U_of_m(m, pr.lam, c1)
    Mp = ((pr.h1 + pr.h2) * U ** p - pr.h1 * m ** p) / pr.h2
    M = Mp ** (1 / p)
    return U, M, integral_J(U, M, pr.lam) - c2


def m_cap(pr: TwoValueProblem) -> float:
    """Upper bound for ``m`` from the branch bound on ``min rho``."""
    beta = -pr.mean
    H = (pr.h1 + beta) * pr.eta
    lam = pr.lam
    bm = bound_m_rho(lam, beta, pr.T, H)
    return beta ** (-1 / (1 + lam)) * bm ** (2 / (1 + lam))


def solve_two_value(pr: TwoValueProblem, n_sweep=N_SWEEP) -> TimeMapSolution:
    """Find ``(m, M)``; among several roots the one with smallest ``M`` is returned."""
    if pr.h1 * pr.eta >= pr.h2 * (pr.T - pr.eta):
        raise BadMean("mean of h must be negative (h1 eta < h2 (T - eta))")
    cap = m_cap(pr)
    ms = np.concatenate([[0.0], np.geomspace(1e-12 * cap, cap, n_sweep)])
    G = np.array([_branch(m, pr)[2] for m in ms])
    roots = []
    for k in range(len(ms) - 1):
        if G[k] == 0:
            roots.append(ms[k])
        elif G[k] * G[k + 1] < 0:
            r = brentq(lambda m: _branch(m, pr)[2], ms[k], ms[k + 1], xtol=1e-300, rtol=1e-15,
                       maxiter=200)
            roots.append(r)
    if G[-1] == 0:
        roots.append(ms[-1])
    if not roots:
        raise NoRoot(f"no sign change of the time-map defect on [0, {cap:.6g}]")
    c1, _ = pr.time_targets()
    found = []
    for m in roots:
        U, M, g2 = _branch(m, pr)
        g1 = integral_I(m, U, pr.lam) - c1
        found.append((float(m), float(M), float(U), float(g1), float(g2)))
    found.sort(key=lambda r: r[1])
    m, M, U, g1, g2 = found[0]
    return TimeMapSolution(pr, m, M, U, (g1, g2), len(found), tuple((r[0], r[1]) for r in found))


def reconstruct(sol: TimeMapSolution, grid_n=4096, t=None) -> PeriodicSolution:
    """Sample ``u`` and ``u'`` on a uniform grid by inverting the travel time."""
    pr = sol.problem
    lam, p, T, eta = pr.lam, 1 - pr.lam, pr.T, pr.eta
    t = np.linspace(0.0, T, grid_n + 1) if t is None else np.asarray(t, dtype=float)
    u = np.empty_like(t)
    du = np.empty_like(t)
    m, M = sol.m, sol.M
    k1, k2 = math.sqrt(2 * pr.h1 / p), math.sqrt(2 * pr.h2 / p)
    first = t < eta
    # convex piece: travel time from the minimum
    d = np.abs(t[first] - eta / 2)
    order = np.argsort(d)
    w = np.empty_like(d)
    w[order] = _invert(kernels.KIND_I, m, d[order] * k1, lam, math.sqrt(sol.u_eta - m))
    u[first] = m + w * w
    if m > 0:
        gap = m ** p * np.expm1(p * np.log1p(w * w / m))
    else:
        gap = (w * w) ** p
    du[first] = np.sign(t[first] - eta / 2) * k1 * np.sqrt(gap)
    # concave piece: travel time to the maximum
    sec = ~first
    tm = (eta + T) / 2
    d = np.abs(t[sec] - tm)
    order = np.argsort(d)
    w = np.empty_like(d)
    w[order] = _invert(kernels.KIND_J, M, d[order] * k2, lam, math.sqrt(M - sol.u_eta))
    u[sec] = M - w * w
    gap = -(M ** p) * np.expm1(p * np.log1p(-np.minimum(w * w / M, 1.0)))
    du[sec] = np.sign(tm - t[sec]) * k2 * np.sqrt(gap)
    meta = SolutionMeta("plain", pr.weight)
    return PeriodicSolution(lam, T, t, u, du, meta,
                            {"solver": "timemap", **sol.summary()})


def from_weight(lam, h: PiecewiseConstant) -> TwoValueProblem:
    """Two-value problem for a weight with one positive piece followed by one negative piece."""
    h = h.merged()
    if h.n_pieces != 2 or not (h.values[0] > 0 > h.values[1]):
        raise BadParameter("need h1 > 0 on [0, eta) and -h2 < 0 on [eta, T)")
    return TwoValueProblem(float(lam), h.period, float(h.breakpoints[1]), float(h.values[0]),
                           float(-h.values[1]))


def solution_json(sol: TimeMapSolution, ps: PeriodicSolution | None = None):
    d = {"problem": sol.problem.__dict__, "summary": sol.summary()}
    if ps is not None:
        d["solution"] = ps.to_dict()
    return json.dumps(d, indent=2)
