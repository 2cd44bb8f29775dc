"""Pseudo-arclength continuation of the fixed-point branch in ``beta``.

The branch starts at the explicit ``beta = 0`` solution and is followed with
an Euler predictor along the tangent and a Newton corrector on the bordered
system. Arclength uses the weighted norm
``ds^2 = dbeta^2 + dx^2 + dy^2 + mean(df^2)``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BadParameter, BetaUnreachable, NoConvergence, OutsideLambda, SeedFailure
from .fixedpoint import DEFAULT_N, TOL_NEWTON, FixedPointSystem, FPState
from .odeshoot import ShootState, shoot
from .transform import PeriodicSolution, SolutionMeta, beta_scale, residual_eq, rho_to_u
from .weights import MeanZeroWeight

__all__ = [
    "TraceOptions",
    "Branch",
    "trace_branch",
    "classify_termination",
    "solve_equation2",
    "TERMINATIONS",
]

TERMINATIONS = ("MinRhoFloor", "NormCap", "BetaTarget", "StepFailure")
MAX_CORRECTOR = 12


@dataclass(frozen=True)
class TraceOptions:
    """Tracer settings; ``None`` means a default scaled by the anchor ``a``."""

    n: int = DEFAULT_N
    a: float | None = None
    floor: float | None = None      # 1e-6 a
    cap: float = 1e6
    step0: float | None = None      # 1e-2 a
    step_max: float | None = None   # a
    step_min: float = 1e-10
    beta_target: float = math.inf
    tol: float = TOL_NEWTON
    max_points: int = 100_000


@dataclass(eq=False)
class Branch:
    lam: float
    system: FixedPointSystem
    points: list
    arclength: list
    steps: list
    termination: str
    floor: float
    cap: float
    message: str = ""

    @property
    def beta_star_empirical(self) -> float:
        ok = [p.beta for p in self.points if p.m_rho > self.floor]
        return max(ok) if ok else math.nan

    @property
    def betas(self):
        return np.array([p.beta for p in self.points])

    def summary_rows(self):
        for p in self.points:
            yield {"beta": p.beta, "m_rho": p.m_rho, "x": p.x, "y": p.y,
                   "f_inf": float(np.max(np.abs(p.f))), "residual": p.residual_norm}

    def to_csv(self, path):
        cols = ["beta", "m_rho", "x", "y", "f_inf", "residual"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh)
            wr.writerow(cols)
            for r in self.summary_rows():
                wr.writerow([repr(float(r[c])) for c in cols])

    def to_jsonl(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for s, p in zip(self.arclength, self.points):
                d = p.to_dict()
                d["arclength"] = s
                fh.write(json.dumps(d) + "\n")


def _wnorm(v, n):
    return math.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2 + float(np.sum(v[3:] ** 2)) / n)


def _weights(size):
    W = np.ones(size)
    W[3:] = 1.0 / (size - 3)
    return W


def _tangent(S, Z, prev=None):
    J, Jb = S.jacobian_z(Z[0], Z[1:])
    n = len(Z)
    W = _weights(n)
    row = W * prev if prev is not None else np.eye(n)[0]
    M = np.vstack([np.column_stack([Jb, J]), row])
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    tau = np.linalg.solve(M, rhs)
    tau /= _wnorm(tau, n - 3)
    if prev is None:
        if tau[0] < 0:
            tau = -tau
    elif np.dot(W * tau, prev) < 0:
        tau = -tau
    return tau


def _correct(S, Zp, tau, tol):
    """Newton on ``R(Z) = 0`` plus the arclength hyperplane through ``Zp``."""
    W = _weights(len(Zp))
    Z = Zp.copy()
    for it in range(1, MAX_CORRECTOR + 1):
        R = S.residual_z(Z[0], Z[1:], check=False)
        g = np.dot(W * tau, Z - Zp)
        J, Jb = S.jacobian_z(Z[0], Z[1:])
        M = np.vstack([np.column_stack([Jb, J]), W * tau])
        try:
            dZ = np.linalg.solve(M, -np.append(R, g))
        except np.linalg.LinAlgError:
            return None, it
        Z = Z + dZ
        if not np.all(np.isfinite(Z)):
            return None, it
        R = S.residual_z(Z[0], Z[1:], check=False)
        if np.max(np.abs(R)) <= tol and abs(np.dot(W * tau, Z - Zp)) <= tol:
            return Z, it
    return None, MAX_CORRECTOR


def _land(S, Z0, Z1, target, tol):
    """Point at exactly ``beta = target`` between two accepted points."""
    s = (target - Z0[0]) / (Z1[0] - Z0[0])
    z = (1 - s) * Z0[1:] + s * Z1[1:]
    st = S.make_state(target, z)
    return S.newton_correct(st, tol=tol)


def trace_branch(lam, w: MeanZeroWeight, opts: TraceOptions | None = None, **kw) -> Branch:
    """Follow the branch from ``beta = 0`` toward ``beta > 0``.

    Stops on ``m_rho < floor`` (MinRhoFloor), ``beta + |x| + |y| + ||f||_inf > cap``
    (NormCap), ``beta >= beta_target`` (BetaTarget, landing exactly on the
    target) or a step below ``step_min`` (StepFailure).
    """
    opts = replace(opts or TraceOptions(), **kw)
    try:
        S = FixedPointSystem(lam, w, opts.a, opts.n)
        _, seed = S.seed()
        if seed.residual_norm > 1e-8 * max(1.0, float(np.max(np.abs(seed.f)))):
            seed = S.newton_correct(seed, tol=opts.tol)
    except (NoConvergence, OutsideLambda) as exc:
        raise SeedFailure(str(exc)) from exc
    a = S.a
    floor = 1e-6 * a if opts.floor is None else opts.floor
    step = 1e-2 * a if opts.step0 is None else opts.step0
    step_max = a if opts.step_max is None else opts.step_max
    n = len(S.t)
    br = Branch(S.lam, S, [seed], [0.0], [0.0], "", floor, opts.cap)

    def done(tag, msg=""):
        br.termination = tag
        br.message = msg
        return br

    if seed.m_rho < floor:
        return done("MinRhoFloor", "seed below floor")
    if opts.beta_target <= 0:
        return done("BetaTarget")
    Z = np.concatenate([[0.0], S.pack(seed)])
    tau = _tangent(S, Z)
    while len(br.points) < opts.max_points:
        if step < opts.step_min:
            return done("StepFailure", f"step {step:.3e} below minimum")
        Zp = Z + step * tau
        Zn, iters = _correct(S, Zp, tau, opts.tol)
        if Zn is None:
            step *= 0.5
            continue
        A = a + Zn[1] + Zn[0] * S._cum(Zn[3:])
        if np.any(A <= 0):
            # corrector crossed the boundary of the positivity set
            step *= 0.5
            continue
        if Zn[0] >= opts.beta_target:
            try:
                p = _land(S, Z, Zn, opts.beta_target, opts.tol)
            except (NoConvergence, OutsideLambda):
                step *= 0.5
                continue
            br.points.append(p)
            br.arclength.append(br.arclength[-1] + _wnorm(np.concatenate([[p.beta], S.pack(p)]) - Z, n))
            br.steps.append(step)
            return done("BetaTarget")
        p = S.make_state(Zn[0], Zn[1:], iters)
        br.points.append(p)
        br.arclength.append(br.arclength[-1] + _wnorm(Zn - Z, n))
        br.steps.append(step)
        if p.m_rho < floor:
            return done("MinRhoFloor")
        if p.beta + p.norm() > opts.cap:
            return done("NormCap")
        try:
            tau = _tangent(S, Zn, tau)
        except np.linalg.LinAlgError:
            return done("StepFailure", "singular bordered Jacobian")
        Z = Zn
        if iters <= 3:
            step = min(2 * step, step_max)
    return done("StepFailure", "point budget exhausted")


def classify_termination(b: Branch) -> dict:
    """Plain-language reading of how the branch ended."""
    last = b.points[-1]
    rep = {"termination": b.termination, "beta_last": last.beta, "m_rho_last": last.m_rho,
           "beta_star_empirical": b.beta_star_empirical, "points": len(b.points)}
    if b.termination == "NormCap":
        rep["reading"] = ("alternative (i): branch unbounded, consistent with beta* = +infinity "
                          "when the positivity floor is never reached")
    elif b.termination == "MinRhoFloor":
        rep["reading"] = "alternative (ii): inf m_rho = 0 approached along the branch"
    elif b.termination == "BetaTarget":
        rep["reading"] = f"beta* >= {last.beta:.17g}"
    else:
        rep["reading"] = f"step failure, no conclusion ({b.message})"
    return rep


def point_at(branch: Branch, beta: float) -> FPState:
    """Branch point at exactly ``beta`` (first crossing along arclength)."""
    S = branch.system
    pts = branch.points
    for p in pts:
        if p.beta == beta:
            return p
    for p0, p1 in zip(pts[:-1], pts[1:]):
        if (p0.beta - beta) * (p1.beta - beta) < 0:
            Z0 = np.concatenate([[p0.beta], S.pack(p0)])
            Z1 = np.concatenate([[p1.beta], S.pack(p1)])
            return _land(S, Z0, Z1, beta, TOL_NEWTON)
    raise BetaUnreachable(f"branch ({branch.termination}) does not reach beta={beta:g}; "
                          f"largest beta {branch.betas.max():.6g}")


def solve_equation2(lam, w: MeanZeroWeight, beta, branch: Branch | None = None, n=DEFAULT_N,
                    polish=True, grid_n=4096, opts: TraceOptions | None = None) -> PeriodicSolution:
    """Positive periodic ``v`` of ``v'' = (-beta + h~)/v^lam`` from the branch point at ``beta``.

    ``rho = A_xi[f]`` gives ``u = rho^(2/(1+lam))`` solving the beta-family
    equation and ``v = beta^(-1/(1+lam)) u``. With ``polish`` the collocation
    profile is used as a warm start for shooting on a ``grid_n`` grid; the
    distance between the two is kept in the diagnostics.
    """
    if not beta > 0:
        raise BadParameter("beta must be positive")
    if branch is None:
        branch = trace_branch(lam, w, opts or TraceOptions(n=n), beta_target=beta)
    p = point_at(branch, beta)
    S = branch.system
    u = rho_to_u(S.rho_solution(p))
    v = beta_scale(u, beta)
    meta = SolutionMeta("shifted", w.base, beta)
    diag = {"solver": "continuation", "beta": beta, "fp_residual": p.residual_norm,
            "m_rho": p.m_rho, "branch_points": len(branch.points),
            "grid_residual": residual_eq(v) if len(v.t) > 32 else math.nan}
    if not polish:
        return PeriodicSolution(lam, v.T, v.t, v.u, v.du, meta, diag)
    g = meta.forcing()
    sol = shoot(lam, g, ShootState(float(v.u[0]), float(v.du[0])), grid_n=grid_n, meta=meta)
    diag["fp_discrepancy"] = float(np.max(np.abs(np.interp(v.t, sol.t, sol.u) - v.u)))
    diag["shoot_iterations"] = sol.diagnostics["iterations"]
    diag["defect"] = sol.diagnostics["defect"]
    diag["solver"] = "continuation+shoot"
    return sol.with_diagnostics(**diag)
