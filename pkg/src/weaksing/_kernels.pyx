# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same API and results as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, log, log2, expm1, log1p, fabs, ceil, pow, isfinite, NAN, INFINITY

cnp.import_array()

cdef enum:
    MAX_LEVELS = 60

KIND_I = 0
KIND_J = 1
OK = 0
FLOOR_HIT = 1
STEP_FAIL = 2

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176
cdef double A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40


cdef inline double _g(int kind, double anchor, double p, double w) nogil:
    cdef double w2 = w * w, d, r
    if kind == 0:
        if w2 <= anchor:
            d = pow(anchor, p) * expm1(p * log1p(w2 / anchor))
        elif anchor > 0.0:
            # no cancellation here; also avoids w2/anchor overflow for tiny anchors
            d = pow(anchor + w2, p) - pow(anchor, p)
        else:
            d = pow(w2, p)
    else:
        r = w2 / anchor
        if r > 1.0:
            r = 1.0
        d = -pow(anchor, p) * expm1(p * log1p(-r))
    return 2.0 * w / sqrt(d)


cdef int _levels(double W, double scale) nogil:
    cdef int k
    if scale <= 0.0:
        return MAX_LEVELS
    if W <= 0.5 * scale:
        return 0
    k = <int> ceil(log2(W / (0.5 * scale)))
    return k if k < MAX_LEVELS else MAX_LEVELS


cdef int _edges(int kind, double anchor, double W, double* e) nogil:
    """Fill ``e`` with panel edges; returns the number of panels."""
    cdef int K, k, n = 0
    if kind == 0:
        K = _levels(W, sqrt(anchor))
        e[0] = 0.0
        n = 1
        for k in range(K, 0, -1):
            e[n] = W * pow(2.0, -k)
            n += 1
        e[n] = W
    else:
        K = _levels(W, sqrt(anchor) - W)
        e[0] = 0.0
        n = 1
        for k in range(1, K + 1):
            e[n] = W - W * pow(2.0, -k)
            n += 1
        e[n] = W
    return n


cdef double _gauss_sum(int kind, double anchor, double p, double* e, int npan,
                       const double[::1] xg, const double[::1] wg, long split) nogil:
    cdef int i, q, ng = xg.shape[0]
    cdef long s
    cdef double lo, hi, a, b, half, mid, tot = 0.0, acc
    for i in range(npan):
        lo = e[i]
        hi = e[i + 1]
        for s in range(split):
            a = lo + (hi - lo) * (<double> s) / split
            b = hi if s == split - 1 else lo + (hi - lo) * (<double> (s + 1)) / split
            half = 0.5 * (b - a)
            mid = 0.5 * (a + b)
            acc = 0.0
            for q in range(ng):
                acc += wg[q] * _g(kind, anchor, p, mid + half * xg[q])
            tot += half * acc
    return tot


cdef double _quad(int kind, double anchor, double W, double lam, const double[::1] xg,
                  const double[::1] wg, double tol, int max_doublings, int* status) nogil:
    cdef double e[MAX_LEVELS + 2]
    cdef double p = 1.0 - lam, prev, cur
    cdef int npan, d
    status[0] = 0
    if W <= 0.0:
        return 0.0
    npan = _edges(kind, anchor, W, e)
    prev = _gauss_sum(kind, anchor, p, e, npan, xg, wg, 1)
    for d in range(1, max_doublings + 1):
        cur = _gauss_sum(kind, anchor, p, e, npan, xg, wg, 1 << d)
        if fabs(cur - prev) <= tol * fabs(cur):
            status[0] = d
            return cur
        prev = cur
    status[0] = -1
    return prev


def panel_edges(int kind, double anchor, double W):
    cdef double e[MAX_LEVELS + 2]
    cdef int n = _edges(kind, anchor, W, e)
    return np.array([e[i] for i in range(n + 1)])


def quad_w(int kind, double anchor, double W, double lam, const double[::1] xg,
           const double[::1] wg, double tol, int max_doublings):
    cdef int st
    cdef double val = _quad(kind, anchor, W, lam, xg, wg, tol, max_doublings, &st)
    return val, st


def integrand_w(int kind, double anchor, double lam, double w):
    return _g(kind, anchor, 1.0 - lam, w)


def invert_w(int kind, double anchor, targets, double lam, double wmax,
             const double[::1] xg, const double[::1] wg, double tol, int max_doublings):
    cdef cnp.ndarray[double, ndim=1] tg = np.ascontiguousarray(targets, dtype=float)
    cdef Py_ssize_t n = tg.shape[0], i
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    cdef double p = 1.0 - lam, qmax, tau, lo, hi, w, q, r, g, w_new, w_prev = -1.0
    cdef int st, it
    qmax = _quad(kind, anchor, wmax, lam, xg, wg, tol, max_doublings, &st)
    if st < 0:
        return out, 1
    for i in range(n):
        tau = tg[i]
        if tau <= 0.0:
            out[i] = 0.0
            continue
        if tau >= qmax:
            out[i] = wmax
            continue
        lo = 0.0
        hi = wmax
        if 0.0 < w_prev < wmax:
            w = w_prev
        else:
            w = wmax * tau / qmax
        for it in range(200):
            q = _quad(kind, anchor, w, lam, xg, wg, tol, max_doublings, &st)
            if st < 0:
                return out, 1
            r = q - tau
            if r > 0.0:
                hi = w
            else:
                lo = w
            g = _g(kind, anchor, p, w)
            if g > 0.0:
                w_new = w - r / g
            else:
                w_new = 0.5 * (lo + hi)
            if not (lo < w_new < hi):
                w_new = 0.5 * (lo + hi)
            if fabs(w_new - w) <= 2e-16 * wmax or hi - lo <= 2e-16 * wmax:
                w = w_new
                break
            w = w_new
        out[i] = w
        w_prev = w
    return out, 0


cdef inline double _acc(double c0, double c1, double lam, double t0, double t, double u) nogil:
    if u <= 0.0:
        return NAN
    return (c0 + c1 * (t - t0)) * exp(-lam * log(u))


def dopri_segment(double c0, double c1, double lam, double t0, double t1, double u, double v,
                  double rtol, double atol, double h, double u_floor, t_out, long max_steps):
    cdef cnp.ndarray[double, ndim=1] to = np.ascontiguousarray(t_out, dtype=float)
    cdef Py_ssize_t nout = to.shape[0], j = 0
    cdef cnp.ndarray[double, ndim=1] u_out = np.empty(nout)
    cdef cnp.ndarray[double, ndim=1] v_out = np.empty(nout)
    cdef double t = t0, stop, hh, err, fac, su, sv, eu, ev
    cdef double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v, k5u, k5v, k6u, k6v, k7u, k7v
    cdef double u2, v2, u3, v3, u4, v4, u5, v5, u6, v6, un, vn
    cdef long nsteps = 0
    cdef bint clipped
    if h <= 0.0:
        h = (t1 - t0) / 16.0
    k1u = v
    k1v = _acc(c0, c1, lam, t0, t, u)
    while t < t1:
        if nsteps >= max_steps:
            return STEP_FAIL, t, u, v, h, nsteps, u_out, v_out
        stop = to[j] if j < nout else t1
        hh = h
        clipped = False
        if t + hh >= stop:
            hh = stop - t
            clipped = True
        u2 = u + hh * A21 * k1u
        v2 = v + hh * A21 * k1v
        k2u = v2
        k2v = _acc(c0, c1, lam, t0, t + C2 * hh, u2)
        u3 = u + hh * (A31 * k1u + A32 * k2u)
        v3 = v + hh * (A31 * k1v + A32 * k2v)
        k3u = v3
        k3v = _acc(c0, c1, lam, t0, t + C3 * hh, u3)
        u4 = u + hh * (A41 * k1u + A42 * k2u + A43 * k3u)
        v4 = v + hh * (A41 * k1v + A42 * k2v + A43 * k3v)
        k4u = v4
        k4v = _acc(c0, c1, lam, t0, t + C4 * hh, u4)
        u5 = u + hh * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u)
        v5 = v + hh * (A51 * k1v + A52 * k2v + A53 * k3v + A54 * k4v)
        k5u = v5
        k5v = _acc(c0, c1, lam, t0, t + C5 * hh, u5)
        u6 = u + hh * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u)
        v6 = v + hh * (A61 * k1v + A62 * k2v + A63 * k3v + A64 * k4v + A65 * k5v)
        k6u = v6
        k6v = _acc(c0, c1, lam, t0, t + hh, u6)
        un = u + hh * (B1 * k1u + B3 * k3u + B4 * k4u + B5 * k5u + B6 * k6u)
        vn = v + hh * (B1 * k1v + B3 * k3v + B4 * k4v + B5 * k5v + B6 * k6v)
        k7u = vn
        k7v = _acc(c0, c1, lam, t0, t + hh, un)
        eu = hh * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u)
        ev = hh * (E1 * k1v + E3 * k3v + E4 * k4v + E5 * k5v + E6 * k6v + E7 * k7v)
        su = atol + rtol * (fabs(u) if fabs(u) > fabs(un) else fabs(un))
        sv = atol + rtol * (fabs(v) if fabs(v) > fabs(vn) else fabs(vn))
        err = sqrt(0.5 * ((eu / su) * (eu / su) + (ev / sv) * (ev / sv)))
        if not isfinite(err):
            h = 0.25 * hh
        elif err <= 1.0:
            nsteps += 1
            t = stop if clipped else t + hh
            u = un
            v = vn
            k1u = k7u
            k1v = k7v
            if clipped and j < nout:
                u_out[j] = u
                v_out[j] = v
                j += 1
            if u <= u_floor:
                return FLOOR_HIT, t, u, v, h, nsteps, u_out, v_out
            if err == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * pow(err, -0.2)
                fac = 5.0 if fac > 5.0 else (0.2 if fac < 0.2 else fac)
            if clipped:
                if hh * fac > h:
                    h = hh * fac
            else:
                h = hh * fac
        else:
            fac = 0.9 * pow(err, -0.2)
            h = hh * (fac if fac > 0.2 else 0.2)
        if h <= 1e-14 * (1.0 + fabs(t)):
            return STEP_FAIL, t, u, v, h, nsteps, u_out, v_out
    return OK, t, u, v, h, nsteps, u_out, v_out
