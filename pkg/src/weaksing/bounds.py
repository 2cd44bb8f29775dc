"""Explicit bounds and existence conditions.

Threshold checks (the two-value, asymmetric two-value and n-piece
conditions, the lower estimates of ``beta*`` and the strategy test
``-mean(h) <= beta*``) are evaluated in exact rational arithmetic: every
finite float is a rational, so inputs are converted with ``Fraction``
without rounding. Bounds with irrational exponents use floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Optional

import numpy as np

from .errors import BadParameter, EmptyMinSet, NotSignChanging
from .transform import PeriodicSolution
from .weights import PiecewiseConstant, Weight, decompose

__all__ = [
    "BoundReport",
    "bound_f_inf",
    "bound_y",
    "bound_x",
    "bound_m_rho",
    "beta_star_prop3",
    "beta_star_cor3",
    "beta_star_eq62",
    "check_cor1",
    "check_cor2",
    "check_cor3",
    "check_strategy",
    "beta_star_lower",
    "verify_prop3_chain",
    "check_branch_point",
]


@dataclass(frozen=True)
class BoundReport:
    name: str
    value: float
    inputs: dict
    satisfied: Optional[bool] = None
    exact: Optional[Fraction] = None
    details: dict = field(default_factory=dict)

    def to_dict(self):
        d = {"name": self.name, "value": self.value, "satisfied": self.satisfied,
             "inputs": {k: _out(v) for k, v in self.inputs.items()},
             "details": {k: _out(v) for k, v in self.details.items()}}
        if self.exact is not None:
            d["exact"] = str(self.exact)
        return d


def _out(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    if isinstance(v, (list, tuple)):
        return [_out(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


def _q(x, name="value") -> Fraction:
    """Exact rational value of a finite number."""
    if isinstance(x, bool):
        raise BadParameter(f"{name}: not a number")
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise BadParameter(f"{name}: cannot parse {x!r}") from exc
    x = Decimal(x) if isinstance(x, Decimal) else float(x)
    if isinstance(x, float) and not math.isfinite(x) or isinstance(x, Decimal) and not x.is_finite():
        raise BadParameter(f"{name}: must be finite")
    return Fraction(x)


def _lam(lam) -> Fraction:
    q = _q(lam, "lambda")
    if not 0 < q < 1:
        raise BadParameter("lambda must lie in (0, 1)")
    return q


def _pos(x, name) -> Fraction:
    q = _q(x, name)
    if not q > 0:
        raise BadParameter(f"{name} must be positive")
    return q


# ------------------------------------------------------------ a-priori bounds

def bound_f_inf(lam, beta, T, h1norm, rho0) -> float:
    """``((1+lam)/(2 rho0)) (beta (1+3 lam) T/(2 lam) + ||h~||_1)``; also bounds ``|y|``."""
    lam = float(lam)
    if not 0 < lam < 1:
        raise BadParameter("lambda must lie in (0, 1)")
    if not rho0 > 0:
        raise BadParameter("rho0 must be positive")
    if beta < 0 or T <= 0 or h1norm < 0:
        raise BadParameter("need beta >= 0, T > 0, ||h~||_1 >= 0")
    return (1 + lam) / (2 * rho0) * (beta * (1 + 3 * lam) * T / (2 * lam) + h1norm)


bound_y = bound_f_inf


def _growth(lam, beta, T, H):
    """``((beta T + H)^e - H^e) / H^e`` with ``e = (1+lam)/(2 lam)``, free of cancellation."""
    e = (1 + lam) / (2 * lam)
    return math.expm1(e * math.log1p(beta * T / H))


def _check_xm(lam, beta, T, H):
    lam = float(lam)
    if not 0 < lam < 1:
        raise BadParameter("lambda must lie in (0, 1)")
    if not (beta > 0 and T > 0 and H > 0):
        raise BadParameter("need beta > 0, T > 0, H~ > 0")
    return lam


def bound_m_rho(lam, beta, T, H_tilde) -> float:
    """Upper bound on ``min rho`` along the branch; tends to ``sqrt(lam) H~`` as ``beta -> 0``."""
    lam = _check_xm(lam, beta, T, H_tilde)
    return beta * T * (1 + lam) / (2 * math.sqrt(lam) * _growth(lam, beta, T, H_tilde))


def bound_x(lam, beta, T, H_tilde, a) -> float:
    """``a + (beta T (1+lam)/(2 sqrt(lam))) (1 + H~^e/((beta T + H~)^e - H~^e))``."""
    lam = _check_xm(lam, beta, T, H_tilde)
    return a + beta * T * (1 + lam) / (2 * math.sqrt(lam)) + bound_m_rho(lam, beta, T, H_tilde)


# --------------------------------------------------------- beta* estimates

def _maybe_exact(q: Fraction, inputs) -> Fraction | float:
    return q if all(isinstance(x, Rational) for x in inputs) else float(q)


def beta_star_prop3(lam, h_star):
    """``lam (1-lam) h*/(4 (1+lam)^2)``; a Fraction when both inputs are rational types."""
    L, h = _lam(lam), _pos(h_star, "h_star")
    return _maybe_exact(L * (1 - L) * h / (4 * (1 + L) ** 2), (lam, h_star))


def _two_piece_den(L, eta, T):
    return 2 * T * (1 + L) ** 2 - L * (1 - L) * (T - 2 * eta)


def beta_star_cor3(lam, h1_star, eta, T=1):
    """``lam (1-lam) h1* eta / (2T(1+lam)^2 - lam(1-lam)(T - 2 eta))``."""
    L, h, e, P = _lam(lam), _pos(h1_star, "h1_star"), _pos(eta, "eta"), _pos(T, "T")
    if not e < P:
        raise BadParameter("eta must lie in (0, T)")
    return _maybe_exact(L * (1 - L) * h * e / _two_piece_den(L, e, P), (lam, h1_star, eta, T))


def beta_star_eq62(lam, h_star_values):
    """``lam (1-lam) min{h_i* > 0} / (2 n^2 (1+lam)^2 + lam (1-lam))`` for equal pieces."""
    L = _lam(lam)
    hs = [_q(v, "h_i*") for v in h_star_values]
    n = len(hs)
    pos = [v for v in hs if v > 0]
    if not pos:
        raise EmptyMinSet("no positive piece")
    q = L * (1 - L) * min(pos) / (2 * n ** 2 * (1 + L) ** 2 + L * (1 - L))
    return _maybe_exact(q, [lam, *h_star_values])


# ------------------------------------------------------- existence checks

def check_cor1(lam, h1, h2) -> BoundReport:
    """Two equal halves ``h1`` and ``-h2``: ``0 < (h2-h1)/(h2+h1) <= lam(1-lam)/(4(1+lam)^2)``."""
    L, a, b = _lam(lam), _pos(h1, "h1"), _pos(h2, "h2")
    thr = L * (1 - L) / (4 * (1 + L) ** 2)
    ratio = (b - a) / (b + a)
    return BoundReport("cor1", float(thr), {"lambda": L, "h1": a, "h2": b},
                       bool(0 < ratio <= thr), thr,
                       {"ratio": ratio, "beta": (b - a) / 2, "h_star": (a + b) / 2})


def check_cor3(lam, h1, h2, eta, T=1) -> BoundReport:
    """Two pieces ``h1`` on ``[0, eta)`` and ``-h2`` on ``[eta, T)``.

    ``value`` is the right-hand side as stated; ``details`` also carries both
    sides divided by ``eta``, which at ``eta = T/2`` are exactly the
    two-halves ratio and threshold.
    """
    L, a, b = _lam(lam), _pos(h1, "h1"), _pos(h2, "h2")
    e, P = _pos(eta, "eta"), _pos(T, "T")
    if not e < P:
        raise BadParameter("eta must lie in (0, T)")
    thr = L * (1 - L) * e * (P - e) / _two_piece_den(L, e, P)
    lhs = (b * (P - e) - a * e) / (b + a)
    beta = (b * (P - e) - a * e) / P
    det = {"lhs": lhs, "lhs_normalized": lhs / e, "threshold_normalized": thr / e, "beta": beta}
    if beta > 0:
        det["beta_star_cor3"] = L * (1 - L) * (a + beta) * e / _two_piece_den(L, e, P)
    return BoundReport("cor3", float(thr), {"lambda": L, "h1": a, "h2": b, "eta": e, "T": P},
                       bool(0 < lhs <= thr), thr, det)


def check_cor2(lam, values) -> BoundReport:
    """``n`` equal pieces with values ``h_1..h_n``."""
    L = _lam(lam)
    hs = [_q(v, "h_i") for v in values]
    n = len(hs)
    if n < 1:
        raise BadParameter("need at least one piece")
    s = sum(hs)
    cand = [n * v for v in hs if n * v > s]
    if not cand or max(hs) <= 0:
        raise EmptyMinSet("no positive piece above the mean")
    mn = min(cand)
    thr = L * (1 - L) / (2 * n ** 2 * (1 + L) ** 2 + L * (1 - L))
    lhs = -s / (mn - s)
    hstar = [v - s / n for v in hs]
    return BoundReport("cor2", float(thr), {"lambda": L, "values": hs}, bool(0 < lhs <= thr), thr,
                       {"lhs": lhs, "min_element": mn, "n": n, "beta": -s / n,
                        "beta_star_eq62": beta_star_eq62(L, hstar)})


def check_strategy(h: Weight, beta_star) -> BoundReport:
    """Test ``-mean(h) <= beta*`` (taking ``beta = -mean(h)``).

    The condition is sometimes printed as ``mean(h) <= beta*``, which is
    void for a negative mean; the report records that reading too.
    """
    if isinstance(h, PiecewiseConstant):
        vals = h.values
    else:
        vals = np.asarray(h.values)
    if vals.min() >= 0 or vals.max() <= 0:
        raise NotSignChanging("weight does not change sign")
    if isinstance(h, PiecewiseConstant) and h.exact is not None:
        P, B, V = h.exact
        widths = [b1 - b0 for b0, b1 in zip(B, list(B[1:]) + [P])]
        mean = sum(w * v for w, v in zip(widths, V)) / P
    else:
        mean = _q(decompose(h)[0])
    if mean >= 0:
        raise NotSignChanging("mean of the weight is not negative")
    bs = _q(beta_star, "beta_star")
    return BoundReport("strategy", float(-mean), {"beta_star": bs}, bool(-mean <= bs), -mean,
                       {"mean": mean, "as_printed_mean_le_beta_star": bool(mean <= bs)})


def beta_star_lower(lam, h: Weight):
    """Best available lower estimate of ``beta*`` for ``h~ = h - mean(h)``.

    Two equal halves use the sharp two-value estimate, two unequal pieces the
    asymmetric one, ``n`` equal pieces the ``n``-piece one. Returns
    ``(estimate, name)`` or ``(None, None)`` for other weights.
    """
    if not isinstance(h, PiecewiseConstant):
        return None, None
    h = h.merged()
    if h.exact is not None:
        P, B, V = h.exact
    else:
        P, B, V = _q(h.period), [_q(b) for b in h.breakpoints], [_q(v) for v in h.values]
    n = len(V)
    widths = [b1 - b0 for b0, b1 in zip(B, list(B[1:]) + [P])]
    mean = sum(w * v for w, v in zip(widths, V)) / P
    hs = [v - mean for v in V]
    if n == 2:
        eta = B[1]
        if eta * 2 == P:
            return beta_star_prop3(_q(lam), hs[0] if hs[0] > 0 else hs[1]), "two_halves"
        if hs[0] > 0:
            return beta_star_cor3(_q(lam), hs[0], eta, P), "two_pieces"
        return None, None
    if n > 2 and all(w == widths[0] for w in widths):
        try:
            return beta_star_eq62(_q(lam), hs), "equal_pieces"
        except EmptyMinSet:
            return None, None
    return None, None


# --------------------------------------------------- checks on solutions

def verify_prop3_chain(u: PeriodicSolution, beta, h_star, m_rho=None) -> dict:
    """Slack of the three inequalities used for the square-wave estimate.

    ``u`` solves ``u'' = (-beta^2 + beta h~)/u^lam`` with ``h~ = h*`` on
    ``[0, T/2)`` and ``-h*`` after; ``m_rho`` defaults to ``min(u)^((1+lam)/2)``.
    Positive slack means the inequality holds.
    """
    lam, T = u.lam, u.T
    if m_rho is None:
        m_rho = u.m ** ((1 + lam) / 2)
    u_half = float(np.interp(T / 2, u.t, u.u))
    M = u.M
    lhs1 = u_half ** (1 + lam)
    rhs1 = m_rho ** 2 + (1 - lam) * (-beta ** 2 + beta * h_star) * T ** 2 / 32
    rhs2 = (m_rho + beta * (1 + lam) * T / (2 * math.sqrt(lam))) ** (2 / (1 + lam))
    lhs3 = M ** (1 + lam)
    rhs3 = m_rho ** 2 + T ** 2 * (1 - lam) * beta * h_star / 16
    rep = {
        "u_half_lower": {"lhs": lhs1, "rhs": rhs1, "slack": lhs1 - rhs1},
        "M_u_upper": {"lhs": M, "rhs": rhs2, "slack": rhs2 - M},
        "M_u_lower": {"lhs": lhs3, "rhs": rhs3, "slack": lhs3 - rhs3},
    }
    rep["all_hold"] = all(v["slack"] >= 0 for v in rep.values())
    return rep


def check_branch_point(lam, state, w, a) -> dict:
    """A-priori bounds at one branch point with ``rho0`` set to its own ``m_rho``."""
    T = w.period
    bf = bound_f_inf(lam, state.beta, T, w.l1, state.m_rho)
    f_inf = float(np.max(np.abs(state.f)))
    rep = {"f_inf": (f_inf, bf, f_inf <= bf), "y": (abs(state.y), bf, abs(state.y) <= bf)}
    if state.beta > 0:
        bx = bound_x(lam, state.beta, T, w.H_tilde, a)
        rep["x"] = (abs(state.x), bx, abs(state.x) <= bx)
    rep["ok"] = all(v[2] for v in rep.values())
    return rep
