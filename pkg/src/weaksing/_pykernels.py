"""Pure-Python kernels (reference implementation and import fallback).

Mirrors ``_kernels.pyx`` function by function; both must return identical
results up to rounding.

Quadrature kernels work in the variable ``w`` obtained from ``s = m + w^2``
(time integral I, anchor ``m``) or ``s = M - w^2`` (time integral J, anchor
``M``); the integrand is then bounded at ``w = 0``.
"""
import math

import numpy as np

KIND_I = 0
KIND_J = 1

OK = 0
FLOOR_HIT = 1
STEP_FAIL = 2

MAX_LEVELS = 60

# Dormand-Prince 5(4)
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# difference between the 5th and embedded 4th order weights
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)


def _integrand(kind, anchor, p, w):
    w2 = w * w
    if kind == KIND_I:
        if anchor > 0.0:
            # expm1 form only where it is needed; the plain difference has no
            # cancellation for w2 > anchor and cannot overflow for tiny anchors
            with np.errstate(over="ignore"):
                small = anchor ** p * np.expm1(p * np.log1p(w2 / anchor))
            d = np.where(w2 <= anchor, small, (anchor + w2) ** p - anchor ** p)
        else:
            d = w2 ** p
    else:
        r = np.minimum(w2 / anchor, 1.0)
        with np.errstate(divide="ignore"):
            d = -(anchor ** p) * np.expm1(p * np.log1p(-r))
    return 2.0 * w / np.sqrt(d)


def _levels(W, scale):
    if scale <= 0.0:
        return MAX_LEVELS
    if W <= 0.5 * scale:
        return 0
    return min(MAX_LEVELS, int(math.ceil(math.log2(W / (0.5 * scale)))))


def panel_edges(kind, anchor, W):
    """Panel edges on ``[0, W]``, graded toward the non-smooth end."""
    if kind == KIND_I:
        K = _levels(W, math.sqrt(anchor))
        return np.array([0.0] + [W * 2.0 ** (-k) for k in range(K, 0, -1)] + [W])
    K = _levels(W, math.sqrt(anchor) - W)
    return np.array([0.0] + [W - W * 2.0 ** (-k) for k in range(1, K + 1)] + [W])


def _gauss_sum(kind, anchor, p, edges, xg, wg, split):
    if split > 1:
        frac = np.arange(split) / split
        lo, hi = edges[:-1], edges[1:]
        edges = np.append((lo[:, None] + (hi - lo)[:, None] * frac[None, :]).ravel(), edges[-1])
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = mid[:, None] + half[:, None] * xg[None, :]
    vals = _integrand(kind, anchor, p, nodes)
    return float(np.sum(half[:, None] * (wg[None, :] * vals)))


def quad_w(kind, anchor, W, lam, xg, wg, tol, max_doublings):
    """Integral over ``[0, W]`` in the ``w`` variable.

    Returns ``(value, doublings)``; ``doublings = -1`` signals that the
    relative change never dropped below ``tol``.
    """
    if W <= 0.0:
        return 0.0, 0
    p = 1.0 - lam
    edges = panel_edges(kind, anchor, W)
    prev = _gauss_sum(kind, anchor, p, edges, xg, wg, 1)
    for d in range(1, max_doublings + 1):
        cur = _gauss_sum(kind, anchor, p, edges, xg, wg, 2 ** d)
        if abs(cur - prev) <= tol * abs(cur):
            return cur, d
        prev = cur
    return prev, -1


def integrand_w(kind, anchor, lam, w):
    return float(_integrand(kind, anchor, 1.0 - lam, np.asarray(w, dtype=float)))


def invert_w(kind, anchor, targets, lam, wmax, xg, wg, tol, max_doublings):
    """Solve ``Q(w) = target`` for each target, ``Q`` the ``w``-integral on ``[0, w]``.

    Safeguarded Newton (``dQ/dw`` is the integrand) inside ``[0, wmax]``.
    Returns ``(w, status)`` with ``status`` non-zero on quadrature failure.
    """
    targets = np.asarray(targets, dtype=float)
    out = np.empty_like(targets)
    p = 1.0 - lam
    qmax, st = quad_w(kind, anchor, wmax, lam, xg, wg, tol, max_doublings)
    if st < 0:
        return out, 1
    w_prev = -1.0
    for i, tau in enumerate(targets):
        if tau <= 0.0:
            out[i] = 0.0
            continue
        if tau >= qmax:
            out[i] = wmax
            continue
        lo, hi = 0.0, wmax
        w = w_prev if 0.0 < w_prev < wmax else wmax * tau / qmax
        for _ in range(200):
            q, st = quad_w(kind, anchor, w, lam, xg, wg, tol, max_doublings)
            if st < 0:
                return out, 1
            r = q - tau
            if r > 0.0:
                hi = w
            else:
                lo = w
            g = float(_integrand(kind, anchor, p, np.array(w)))
            w_new = w - r / g if g > 0.0 else 0.5 * (lo + hi)
            if not (lo < w_new < hi):
                w_new = 0.5 * (lo + hi)
            if abs(w_new - w) <= 2e-16 * wmax or hi - lo <= 2e-16 * wmax:
                w = w_new
                break
            w = w_new
        out[i] = w
        w_prev = w
    return out, 0


def dopri_segment(c0, c1, lam, t0, t1, u, v, rtol, atol, h, u_floor, t_out, max_steps):
    """Integrate ``u'' = (c0 + c1 (t - t0)) / u**lam`` from ``t0`` to ``t1``.

    Steps are clipped to land exactly on every time in ``t_out`` (sorted,
    inside ``(t0, t1]``). Returns
    ``(status, t, u, v, h_next, nsteps, u_out, v_out)``.
    """
    t_out = np.asarray(t_out, dtype=float)
    nout = len(t_out)
    u_out = np.empty(nout)
    v_out = np.empty(nout)
    j = 0
    t = t0
    if h <= 0.0:
        h = (t1 - t0) / 16.0
    nsteps = 0

    def acc(tt, uu):
        if uu <= 0.0:
            return math.nan
        return (c0 + c1 * (tt - t0)) * math.exp(-lam * math.log(uu))

    k1u, k1v = v, acc(t, u)
    while t < t1:
        if nsteps >= max_steps:
            return STEP_FAIL, t, u, v, h, nsteps, u_out, v_out
        stop = t_out[j] if j < nout else t1
        hh = h
        clipped = False
        if t + hh >= stop:
            hh = stop - t
            clipped = True
        # stages
        u2 = u + hh * A21 * k1u
        v2 = v + hh * A21 * k1v
        k2u, k2v = v2, acc(t + C2 * hh, u2)
        u3 = u + hh * (A31 * k1u + A32 * k2u)
        v3 = v + hh * (A31 * k1v + A32 * k2v)
        k3u, k3v = v3, acc(t + C3 * hh, u3)
        u4 = u + hh * (A41 * k1u + A42 * k2u + A43 * k3u)
        v4 = v + hh * (A41 * k1v + A42 * k2v + A43 * k3v)
        k4u, k4v = v4, acc(t + C4 * hh, u4)
        u5 = u + hh * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u)
        v5 = v + hh * (A51 * k1v + A52 * k2v + A53 * k3v + A54 * k4v)
        k5u, k5v = v5, acc(t + C5 * hh, u5)
        u6 = u + hh * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u)
        v6 = v + hh * (A61 * k1v + A62 * k2v + A63 * k3v + A64 * k4v + A65 * k5v)
        k6u, k6v = v6, acc(t + hh, u6)
        un = u + hh * (B1 * k1u + B3 * k3u + B4 * k4u + B5 * k5u + B6 * k6u)
        vn = v + hh * (B1 * k1v + B3 * k3v + B4 * k4v + B5 * k5v + B6 * k6v)
        k7u, k7v = vn, acc(t + hh, un)
        eu = hh * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u)
        ev = hh * (E1 * k1v + E3 * k3v + E4 * k4v + E5 * k5v + E6 * k6v + E7 * k7v)
        su = atol + rtol * max(abs(u), abs(un))
        sv = atol + rtol * max(abs(v), abs(vn))
        err = math.sqrt(0.5 * ((eu / su) ** 2 + (ev / sv) ** 2))
        if not math.isfinite(err):
            h = 0.25 * hh
        elif err <= 1.0:
            nsteps += 1
            t = stop if clipped else t + hh
            u, v = un, vn
            k1u, k1v = k7u, k7v
            if clipped and j < nout:
                u_out[j] = u
                v_out[j] = v
                j += 1
            if u <= u_floor:
                return FLOOR_HIT, t, u, v, h, nsteps, u_out, v_out
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h = max(h, hh * fac) if clipped else hh * fac
        else:
            h = hh * max(0.2, 0.9 * err ** -0.2)
        if h <= 1e-14 * (1.0 + abs(t)):
            return STEP_FAIL, t, u, v, h, nsteps, u_out, v_out
    return OK, t, u, v, h, nsteps, u_out, v_out
