"""Discretized fixed-point system for positive periodic solutions.

Unknowns are ``(x, y, f)`` with ``f`` sampled on a grid that contains every
breakpoint of ``h~``; ``beta`` is a parameter. With

    A(t) = a + x + beta int_0^t f,
    B(t) = (a + x) y + int_0^t [kappa beta f^2 + mu (-beta + h~)],

``kappa = 2 lam/(1+lam)``, ``mu = (1+lam)/2``, the system is

    int_0^T f = 0,   (1/T) int_0^T f^2 = (1+lam)^2/(4 lam),   A f = B  on the grid,

and ``rho = A`` is then a positive periodic solution of the regularized
equation. ``f`` is treated as piecewise linear between nodes and every
integral is the exact integral of that interpolant, so the explicit
``beta = 0`` solution ``f = gamma + delta sigma`` is reproduced to rounding.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BadAnchor, BadParameter, NoConvergence, OutsideLambda
from .transform import RhoSolution, SolutionMeta
from .weights import MeanZeroWeight, default_anchor

__all__ = [
    "Xi",
    "FPState",
    "SeedSolution",
    "FixedPointSystem",
    "make_grid",
    "seed_beta_zero",
    "jacobian_value",
    "jacobian_sign",
]

DEFAULT_N = 256
TOL_NEWTON = 1e-10
MAX_ITER = 50
MAX_HALVINGS = 30


@dataclass(frozen=True)
class Xi:
    beta: float
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class FPState:
    xi: Xi
    f: np.ndarray
    residual_norm: float = math.nan
    m_rho: float = math.nan
    M_rho: float = math.nan
    iterations: int = 0

    @property
    def beta(self):
        return self.xi.beta

    @property
    def x(self):
        return self.xi.x

    @property
    def y(self):
        return self.xi.y

    def norm(self) -> float:
        """``|x| + |y| + ||f||_inf``."""
        return abs(self.x) + abs(self.y) + float(np.max(np.abs(self.f)))

    def to_dict(self):
        return {
            "beta": self.beta,
            "x": self.x,
            "y": self.y,
            "f": self.f.tolist(),
            "residual_norm": self.residual_norm,
            "m_rho": self.m_rho,
            "M_rho": self.M_rho,
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        return cls(Xi(d["beta"], d["x"], d["y"]), np.asarray(d["f"], dtype=float),
                   d.get("residual_norm", math.nan), d.get("m_rho", math.nan),
                   d.get("M_rho", math.nan))


@dataclass(frozen=True)
class SeedSolution:
    delta_star: float
    gamma_star: float
    y_star: float
    x_star: float


def make_grid(T: float, n: int, nodes=()) -> np.ndarray:
    """Uniform ``n``-cell grid on ``[0, T]`` with every point of ``nodes`` inserted.

    Uniform nodes closer than a quarter cell to an inserted point are dropped.
    """
    if n < 2:
        raise BadParameter("grid needs at least 2 cells")
    h = T / n
    t = np.linspace(0.0, T, n + 1)
    extra = []
    for b in np.asarray(nodes, dtype=float):
        if b <= 0.0 or b >= T:
            continue
        k = int(round(b / h))
        if abs(k * h - b) <= 1e-12 * T:
            t[k] = b
            continue
        extra.append(b)
    if extra:
        extra = np.asarray(extra)
        keep = np.ones(len(t), dtype=bool)
        for b in extra:
            near = np.abs(t - b) < 0.25 * h
            near[0] = near[-1] = False
            keep &= ~near
        t = np.union1d(t[keep], extra)
    return t


class FixedPointSystem:
    """The discretized system for one ``(lam, h~, a, grid)``.

    Holds only immutable data; instances can be shared between threads.
    """

    def __init__(self, lam: float, w: MeanZeroWeight, a: float | None = None, n: int = DEFAULT_N):
        lam = float(lam)
        if not 0.0 < lam < 1.0:
            raise BadParameter("lambda must lie in (0, 1)")
        self.lam = lam
        self.w = w
        self.T = w.period
        self.sqrt_la = math.sqrt(lam * w.alpha)
        self.a = default_anchor(lam, w) if a is None else float(a)
        if not self.a > self.sqrt_la:
            raise BadAnchor(f"anchor a={self.a:g} must exceed sqrt(lambda*alpha)={self.sqrt_la:g}")
        self.n = n
        self.t = make_grid(self.T, n, w.base.nodes)
        self.h = np.diff(self.t)
        self.sigma = w.sigma(self.t)
        self.kappa = 2 * lam / (1 + lam)
        self.mu = (1 + lam) / 2
        self.c = (1 + lam) ** 2 / (4 * lam)
        self.size = len(self.t) + 2

    # -- integrals of the piecewise-linear interpolant
    def _cum(self, f):
        return np.concatenate([[0.0], np.cumsum(self.h * (f[:-1] + f[1:]) / 2)])

    def _cum_sq(self, f):
        q = self.h * (f[:-1] ** 2 + f[:-1] * f[1:] + f[1:] ** 2) / 3
        return np.concatenate([[0.0], np.cumsum(q)])

    def integral(self, f) -> float:
        return float(np.sum(self.h * (f[:-1] + f[1:]) / 2))

    def integral_sq(self, f) -> float:
        return float(np.sum(self.h * (f[:-1] ** 2 + f[:-1] * f[1:] + f[1:] ** 2) / 3))

    def eval_A(self, xi: Xi, f):
        return self.a + xi.x + xi.beta * self._cum(np.asarray(f, dtype=float))

    def eval_B(self, xi: Xi, f):
        f = np.asarray(f, dtype=float)
        return ((self.a + xi.x) * xi.y + self.kappa * xi.beta * self._cum_sq(f)
                + self.mu * (self.sigma - xi.beta * self.t))

    def apply_F(self, xi: Xi, f):
        """One application of the fixed-point map; returns ``(x', y', f')``."""
        f = np.asarray(f, dtype=float)
        A = self.eval_A(xi, f)
        if np.any(A <= 0):
            raise OutsideLambda(f"A <= 0 at {int(np.sum(A <= 0))} node(s)")
        B = self.eval_B(xi, f)
        return (xi.x - self.integral(f),
                xi.y - self.integral_sq(f) / self.T + self.c,
                B / A)

    # -- residual and Jacobians on the packed vector z = (x, y, f_0..f_N)
    def pack(self, state: FPState):
        return np.concatenate([[state.x, state.y], state.f])

    def residual_z(self, beta, z, check=True):
        x, y, f = z[0], z[1], z[2:]
        C = self._cum(f)
        D = self._cum_sq(f)
        A = self.a + x + beta * C
        if check and np.any(A <= 0):
            raise OutsideLambda(f"A <= 0 at {int(np.sum(A <= 0))} node(s)")
        B = (self.a + x) * y + self.kappa * beta * D + self.mu * (self.sigma - beta * self.t)
        return np.concatenate([[C[-1], D[-1] / self.T - self.c], A * f - B])

    def residual(self, state: FPState):
        """Residual vector (length ``N + 3``) of the collocation system."""
        return self.residual_z(state.beta, self.pack(state))

    def jacobian_z(self, beta, z):
        """Analytic ``(dR/dz, dR/dbeta)``."""
        x, y, f = z[0], z[1], z[2:]
        n = len(f)
        h = self.h
        k = np.arange(n - 1)
        Pc = np.zeros((n - 1, n))
        Pc[k, k] = h / 2
        Pc[k, k + 1] = h / 2
        Pd = np.zeros((n - 1, n))
        Pd[k, k] = h * (2 * f[:-1] + f[1:]) / 3
        Pd[k, k + 1] = h * (f[:-1] + 2 * f[1:]) / 3
        Wc = np.vstack([np.zeros(n), np.cumsum(Pc, axis=0)])
        Wd = np.vstack([np.zeros(n), np.cumsum(Pd, axis=0)])
        C = self._cum(f)
        D = self._cum_sq(f)
        A = self.a + x + beta * C
        J = np.zeros((n + 2, n + 2))
        J[0, 2:] = Wc[-1]
        J[1, 2:] = Wd[-1] / self.T
        J[2:, 0] = f - y
        J[2:, 1] = -(self.a + x)
        J[2:, 2:] = beta * (f[:, None] * Wc - self.kappa * Wd)
        J[2 + np.arange(n), 2 + np.arange(n)] += A
        Jb = np.concatenate([[0.0, 0.0], C * f - self.kappa * D + self.mu * self.t])
        return J, Jb

    def jacobian_fd(self, beta, z):
        """Forward differences with step ``1e-7 (1 + |z_j|)``."""
        r0 = self.residual_z(beta, z, check=False)
        J = np.empty((len(r0), len(z)))
        for j in range(len(z)):
            dz = 1e-7 * (1.0 + abs(z[j]))
            zp = z.copy()
            zp[j] += dz
            J[:, j] = (self.residual_z(beta, zp, check=False) - r0) / dz
        db = 1e-7 * (1.0 + abs(beta))
        Jb = (self.residual_z(beta + db, z, check=False) - r0) / db
        return J, Jb

    def make_state(self, beta, z, iterations=0) -> FPState:
        A = self.a + z[0] + beta * self._cum(z[2:])
        r = self.residual_z(beta, z, check=False)
        return FPState(Xi(float(beta), float(z[0]), float(z[1])), np.array(z[2:], dtype=float),
                       float(np.max(np.abs(r))), float(A.min()), float(A.max()), iterations)

    # -- seed and Newton
    def seed(self):
        """Explicit ``beta = 0`` solution ``f = gamma + delta sigma``."""
        w = self.w
        delta = (1 + self.lam) / (2 * self.sqrt_la)
        gamma = -w.sigma_bar * delta
        x = self.sqrt_la - self.a
        s = SeedSolution(delta, gamma, gamma, x)
        z = np.concatenate([[x, gamma], gamma + delta * self.sigma])
        return s, self.make_state(0.0, z)

    def newton_correct(self, state: FPState, tol=TOL_NEWTON, max_iter=MAX_ITER, jac="analytic"):
        """Newton at fixed ``beta``; steps are halved until ``A > 0`` on the grid."""
        beta = state.beta
        z = self.pack(state)
        jfun = self.jacobian_z if jac == "analytic" else self.jacobian_fd
        for it in range(max_iter + 1):
            r = self.residual_z(beta, z)
            if np.max(np.abs(r)) <= tol:
                return self.make_state(beta, z, it)
            if it == max_iter:
                break
            J, _ = jfun(beta, z)
            try:
                dz = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError as exc:
                raise NoConvergence(f"singular Jacobian at iteration {it}") from exc
            step = 1.0
            for _ in range(MAX_HALVINGS + 1):
                zt = z + step * dz
                if np.all(self.a + zt[0] + beta * self._cum(zt[2:]) > 0):
                    break
                step *= 0.5
            else:
                raise OutsideLambda("no damped step keeps A > 0")
            z = zt
        raise NoConvergence(f"residual {np.max(np.abs(r)):.3e} after {max_iter} iterations")

    def rho_solution(self, state: FPState) -> RhoSolution:
        """``rho = A_xi[f]`` and ``rho' = beta f`` as a profile of the regular equation."""
        if not state.beta > 0:
            raise BadParameter("rho solves the regular equation only for beta > 0")
        rho = self.eval_A(state.xi, state.f)
        meta = SolutionMeta("beta_family", self.w.base, state.beta)
        return RhoSolution(self.lam, self.T, self.t, rho, state.beta * state.f, meta)

    def with_state(self, state: FPState, **kw) -> FPState:
        return replace(state, **kw)


def seed_beta_zero(lam, w: MeanZeroWeight, a=None, n=DEFAULT_N):
    """``(SeedSolution, FPState)`` of the explicit ``beta = 0`` solution."""
    return FixedPointSystem(lam, w, a, n).seed()


def jacobian_value(lam, w: MeanZeroWeight, a=None) -> float:
    """Determinant of the reduced 4x4 Jacobian at the seed (closed form)."""
    lam = float(lam)
    if not w.alpha > 0:
        from .errors import TrivialWeight

        raise TrivialWeight("alpha = 0")
    sq = math.sqrt(lam * w.alpha)
    a = default_anchor(lam, w) if a is None else float(a)
    if not a > sq:
        raise BadAnchor("anchor must exceed sqrt(lambda*alpha)")
    delta = (1 + lam) / (2 * sq)
    x = sq - a
    # int_0^T (sigma - sigma_bar) sigma = T alpha
    return (1 + lam) * delta / (a + x) ** 2 * w.period * w.alpha


def jacobian_sign(lam, w: MeanZeroWeight, a=None) -> int:
    return 1 if jacobian_value(lam, w, a) > 0 else -1
