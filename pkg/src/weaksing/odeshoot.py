"""Direct integration of ``u'' = h(t)/u^lam`` and shooting for periodic orbits.

Integration is Dormand-Prince 5(4) run segment by segment between the
breakpoints of ``h`` (on each segment ``h`` is affine), so the integrator
never steps across a jump. Periodic solutions are found by Newton's method
on the period map ``(u0, v0) -> (u(T), u'(T))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import BadParameter, FloorHit, NoConvergence
from .transform import PeriodicSolution, SolutionMeta
from .weights import Weight

__all__ = ["ShootState", "Trajectory", "integrate", "shoot", "cold_start", "period_map"]

RTOL = 1e-12
TOL_SHOOT = 1e-10
FLOOR_REL = 1e-8
MAX_STEPS = 10_000_000


@dataclass(frozen=True)
class ShootState:
    u0: float
    v0: float
    defect: tuple = (math.nan, math.nan)

    def __post_init__(self):
        if not self.u0 > 0:
            raise BadParameter("u0 must be positive")

    @property
    def defect_norm(self) -> float:
        return max(abs(self.defect[0]), abs(self.defect[1]))


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    u: np.ndarray
    du: np.ndarray
    nsteps: int = 0

    def to_csv(self, path):
        np.savetxt(path, np.column_stack([self.t, self.u, self.du]), delimiter=",",
                   header="t,u,du", comments="", fmt="%.17g")


def integrate(lam, h: Weight, u0, v0, u_floor=None, t_out=None, rtol=RTOL, atol=None):
    """Integrate one period from ``(u0, v0)`` at ``t = 0``.

    ``t_out`` are extra output times in ``(0, T]``; the returned trajectory
    always starts at ``t = 0`` and ends at ``t = T``. Raises :class:`FloorHit`
    if ``u`` drops to ``u_floor`` (default ``1e-8 u0``).
    """
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise BadParameter("lambda must lie in (0, 1)")
    if u_floor is None:
        u_floor = FLOOR_REL * u0
    if not u0 > u_floor > 0:
        raise BadParameter("need u0 > u_floor > 0")
    if atol is None:
        atol = rtol
    T = h.period
    t_out = np.unique(np.append(np.asarray([] if t_out is None else t_out, dtype=float), T))
    if t_out[0] <= 0.0 or t_out[-1] > T:
        raise BadParameter("output times must lie in (0, T]")
    ts, us, vs = [0.0], [float(u0)], [float(v0)]
    u, v, step, nsteps = float(u0), float(v0), 0.0, 0
    for t0, t1, c0, c1 in h.segments():
        lo = np.searchsorted(t_out, t0, side="right")
        hi = np.searchsorted(t_out, t1, side="right")
        outs = t_out[lo:hi]
        st, t, u, v, step, ns, uo, vo = kernels.dopri_segment(
            float(c0), float(c1), lam, float(t0), float(t1), u, v, rtol, atol, step,
            float(u_floor), outs, MAX_STEPS)
        nsteps += ns
        if st == kernels.FLOOR_HIT:
            raise FloorHit(t, u0, v0)
        if st != kernels.OK:
            raise NoConvergence(f"integrator stalled at t={t:.6g}")
        ts.extend(outs.tolist())
        us.extend(uo.tolist())
        vs.extend(vo.tolist())
    return Trajectory(np.array(ts), np.array(us), np.array(vs), nsteps)


def period_map(lam, h: Weight, u0, v0, **kw):
    tr = integrate(lam, h, u0, v0, **kw)
    return tr.u[-1], tr.du[-1]


def cold_start(lam, h: Weight) -> float:
    """Heuristic ``u0``: twice ``(T^2 (1-lam)(-mean)/16)^(1/(1+lam))``, ``v0 = 0``."""
    mean = h.mean()
    scale = -mean if mean < 0 else np.mean(np.abs(h(np.linspace(0, h.period, 65)[:-1])))
    scale = max(scale, 1e-300)
    return 2.0 * (h.period ** 2 * (1 - lam) * scale / 16) ** (1 / (1 + lam))


def _newton(lam, h, u0, v0, tol, max_iter):
    def defect(a, b):
        uT, vT = period_map(lam, h, a, b)
        return np.array([uT - a, vT - b])

    z = np.array([u0, v0], dtype=float)
    F = defect(*z)
    for it in range(max_iter + 1):
        nrm = np.max(np.abs(F))
        if nrm <= tol:
            return z, F, it
        if it == max_iter:
            break
        J = np.empty((2, 2))
        for j in range(2):
            dz = 1e-7 * (1.0 + abs(z[j]))
            zp = z.copy()
            zp[j] += dz
            J[:, j] = (defect(*zp) - F) / dz
        try:
            dz = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("singular shooting Jacobian") from exc
        s = 1.0
        for _ in range(31):
            zt = z + s * dz
            if zt[0] > 0:
                try:
                    Ft = defect(*zt)
                    if np.max(np.abs(Ft)) < nrm:
                        break
                except FloorHit:
                    pass
            s *= 0.5
        else:
            raise NoConvergence(f"no descent step from defect {nrm:.3e}")
        z, F = zt, Ft
    raise NoConvergence(f"defect {np.max(np.abs(F)):.3e} after {max_iter} iterations")


def shoot(lam, h: Weight, guess: ShootState | None = None, grid_n=4096, tol=TOL_SHOOT,
          max_iter=50, meta: SolutionMeta | None = None) -> PeriodicSolution:
    """Periodic solution of ``u'' = h/u^lam`` by shooting on the period map.

    Without a guess the cold-start heuristic is tried first, then ``u0``
    scaled by powers of two (``v0 = 0``). The result is sampled on a uniform
    grid of ``grid_n`` cells.
    """
    lam = float(lam)
    if guess is not None:
        z, F, it = _newton(lam, h, guess.u0, guess.v0, tol, max_iter)
    else:
        base = cold_start(lam, h)
        last = None
        for k in (0, 1, -1, 2, -2, 3, -3, 4, 5, 6):
            try:
                z, F, it = _newton(lam, h, base * 2.0 ** k, 0.0, tol, max_iter)
                break
            except (NoConvergence, FloorHit) as exc:
                last = exc
        else:
            raise NoConvergence(f"cold start failed: {last}")
    T = h.period
    grid = np.linspace(0.0, T, grid_n + 1)
    tr = integrate(lam, h, z[0], z[1], t_out=grid[1:])
    meta = meta or SolutionMeta("plain", h)
    state = ShootState(float(z[0]), float(z[1]), (float(F[0]), float(F[1])))
    return PeriodicSolution(lam, T, tr.t, tr.u, tr.du, meta,
                            {"solver": "odeshoot", "iterations": it, "u0": state.u0,
                             "v0": state.v0, "defect": list(state.defect), "nsteps": tr.nsteps})
