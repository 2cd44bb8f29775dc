"""Changes of variables between the singular and the regularized problem.

For a solution ``u`` of ``u'' = (-beta^2 + beta h~)/u^lam`` the function
``rho = u^((lam+1)/2)`` solves the regular equation

    (rho rho')' - (2 lam/(1+lam)) rho'^2 = ((1+lam)/2)(-beta^2 + beta h~),

and ``v = beta^(-1/(1+lam)) u`` solves ``v'' = (-beta + h~)/v^lam``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import BadParameter, GridTooCoarse, NonPositive
from .weights import MeanZeroWeight, Weight

__all__ = [
    "SolutionMeta",
    "PeriodicSolution",
    "RhoSolution",
    "u_to_rho",
    "rho_to_u",
    "beta_scale",
    "residual_eq",
    "second_difference",
    "TOL_PER",
]

TOL_PER = 1e-8

EQUATIONS = ("plain", "shifted", "beta_family")


@dataclass(frozen=True)
class SolutionMeta:
    """Which equation a profile solves.

    ``plain``: ``u'' = h/u^lam`` with ``weight = h``.
    ``shifted``: ``u'' = (-beta + h~)/u^lam`` with ``weight = h~``.
    ``beta_family``: ``u'' = (-beta^2 + beta h~)/u^lam`` with ``weight = h~``.
    """

    equation: str
    weight: Weight
    beta: Optional[float] = None

    def __post_init__(self):
        if self.equation not in EQUATIONS:
            raise BadParameter(f"unknown equation {self.equation!r}")
        if isinstance(self.weight, MeanZeroWeight):
            object.__setattr__(self, "weight", self.weight.base)
        if self.equation != "plain" and (self.beta is None or not self.beta > 0):
            raise BadParameter("beta must be positive for shifted and beta_family")

    def forcing(self) -> Weight:
        """The coefficient ``g`` in ``u'' = g(t)/u^lam`` as a weight."""
        if self.equation == "plain":
            return self.weight
        if self.equation == "shifted":
            return self.weight.shifted(-self.beta)
        return self.weight.scaled(self.beta).shifted(-self.beta ** 2)

    def to_dict(self):
        return {"equation": self.equation, "beta": self.beta, "weight": self.weight.to_config()}


def _check_grid(t, *arrays):
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or len(t) < 2 or np.any(np.diff(t) <= 0):
        raise BadParameter("grid must be strictly increasing")
    out = [t]
    for a in arrays:
        a = np.asarray(a, dtype=float)
        if a.shape != t.shape:
            raise BadParameter("grid and values have different lengths")
        out.append(a)
    return out


@dataclass(frozen=True, eq=False)
class PeriodicSolution:
    lam: float
    T: float
    t: np.ndarray
    u: np.ndarray
    du: np.ndarray
    meta: SolutionMeta
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        t, u, du = _check_grid(self.t, self.u, self.du)
        if not np.all(u > 0):
            raise NonPositive("u must be positive at every node")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "du", du)

    @property
    def m(self) -> float:
        return float(self.u.min())

    @property
    def M(self) -> float:
        return float(self.u.max())

    def periodicity_defect(self):
        return float(abs(self.u[0] - self.u[-1])), float(abs(self.du[0] - self.du[-1]))

    def is_periodic(self, tol=TOL_PER) -> bool:
        return max(self.periodicity_defect()) <= tol

    def at(self, t):
        """Linear interpolation of ``u`` (for diagnostics only)."""
        return np.interp(t, self.t, self.u)

    def with_diagnostics(self, **kw) -> "PeriodicSolution":
        return replace(self, diagnostics={**self.diagnostics, **kw})

    def to_csv(self, path):
        np.savetxt(path, np.column_stack([self.t, self.u, self.du]), delimiter=",",
                   header="t,u,du", comments="", fmt="%.17g")

    def to_dict(self, include_data=True):
        d = {
            "lambda": self.lam,
            "T": self.T,
            "meta": self.meta.to_dict(),
            "m_u": self.m,
            "M_u": self.M,
            "periodicity_defect": list(self.periodicity_defect()),
            "diagnostics": _jsonable(self.diagnostics),
        }
        if include_data:
            d.update(t=self.t.tolist(), u=self.u.tolist(), du=self.du.tolist())
        return d

    def to_json(self, path=None, include_data=True):
        text = json.dumps(self.to_dict(include_data), indent=2)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


@dataclass(frozen=True, eq=False)
class RhoSolution:
    lam: float
    T: float
    t: np.ndarray
    rho: np.ndarray
    drho: np.ndarray
    meta: SolutionMeta

    def __post_init__(self):
        t, r, dr = _check_grid(self.t, self.rho, self.drho)
        if not np.all(r > 0):
            raise NonPositive("rho must be positive at every node")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "rho", r)
        object.__setattr__(self, "drho", dr)

    @property
    def m_rho(self) -> float:
        return float(self.rho.min())

    @property
    def M_rho(self) -> float:
        return float(self.rho.max())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def u_to_rho(s: PeriodicSolution) -> RhoSolution:
    lam = s.lam
    if not np.all(s.u > 0):
        raise NonPositive("u must be positive")
    rho = s.u ** ((lam + 1) / 2)
    drho = 0.5 * (lam + 1) * s.u ** ((lam - 1) / 2) * s.du
    return RhoSolution(lam, s.T, s.t, rho, drho, s.meta)


def rho_to_u(r: RhoSolution) -> PeriodicSolution:
    lam = r.lam
    if not np.all(r.rho > 0):
        raise NonPositive("rho must be positive")
    u = r.rho ** (2 / (1 + lam))
    du = (2 / (1 + lam)) * r.rho ** ((1 - lam) / (1 + lam)) * r.drho
    return PeriodicSolution(lam, r.T, r.t, u, du, r.meta)


def beta_scale(s: PeriodicSolution, beta: Optional[float] = None) -> PeriodicSolution:
    """Map a solution of the ``beta``-family (``beta_family``) to one of ``shifted``."""
    if beta is None:
        beta = s.meta.beta
    if beta is None or not beta > 0:
        raise BadParameter("beta must be positive")
    c = beta ** (-1.0 / (1.0 + s.lam))
    meta = SolutionMeta("shifted", s.meta.weight, beta)
    return PeriodicSolution(s.lam, s.T, s.t, c * s.u, c * s.du, meta, dict(s.diagnostics))


def _stencil_mask(t, jumps):
    """Interior nodes whose stencil ``(t[i-1], t[i+1])`` holds no jump of the forcing."""
    mask = np.zeros(len(t), dtype=bool)
    mask[1:-1] = True
    if len(jumps):
        lo = np.searchsorted(jumps, t[:-2], side="right")
        hi = np.searchsorted(jumps, t[2:], side="left")
        mask[1:-1] &= hi <= lo
    return mask


def second_difference(t, y):
    """Centered second difference at interior nodes (non-uniform grids allowed)."""
    hm = t[1:-1] - t[:-2]
    hp = t[2:] - t[1:-1]
    return 2.0 * ((y[2:] - y[1:-1]) / hp - (y[1:-1] - y[:-2]) / hm) / (hp + hm)


def residual_eq(s, forcing=None, beta=None, return_profile=False):
    """Max residual of the ODE at interior nodes away from forcing jumps.

    For a :class:`PeriodicSolution` this is ``|u'' - g(t)/u^lam|`` with
    ``g`` taken from ``forcing`` (a weight ``h``, or a pair
    ``(beta, h~)`` meaning ``-beta + h~``) or else from ``s.meta``.
    For a :class:`RhoSolution` the regular form is checked,
    ``(rho^2)''/2 - (2 lam/(1+lam)) rho'^2 - ((1+lam)/2)(-beta^2 + beta h~)``.
    """
    t = s.t
    if len(t) - 1 < 32:
        raise GridTooCoarse(f"residual needs at least 32 cells, got {len(t) - 1}")
    lam = s.lam
    if isinstance(s, RhoSolution):
        b = s.meta.beta if beta is None else beta
        ht = s.meta.weight if forcing is None else forcing
        if isinstance(ht, MeanZeroWeight):
            ht = ht.base
        mask = _stencil_mask(t, ht.discontinuities)
        lhs = 0.5 * second_difference(t, s.rho ** 2) - (2 * lam / (1 + lam)) * s.drho[1:-1] ** 2
        rhs = 0.5 * (1 + lam) * (-b ** 2 + b * ht(t[1:-1]))
        r = np.abs(lhs - rhs)
    else:
        if forcing is None:
            g = s.meta.forcing()
        elif isinstance(forcing, tuple):
            b, ht = forcing
            g = (ht.base if isinstance(ht, MeanZeroWeight) else ht).shifted(-b)
        else:
            g = forcing.base if isinstance(forcing, MeanZeroWeight) else forcing
        mask = _stencil_mask(t, g.discontinuities)
        d2 = second_difference(t, s.u)
        r = np.abs(d2 - g(t[1:-1]) / s.u[1:-1] ** lam)
    r = np.where(mask[1:-1], r, np.nan)
    worst = float(np.nanmax(r)) if np.any(mask) else float("nan")
    if return_profile:
        return worst, r
    return worst
