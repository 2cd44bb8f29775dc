"""Independent reference computations used by the tests."""
import math

import mpmath
import numpy as np
from scipy.integrate import quad


def mp_integral_I(m, U, lam, dps=20):
    """Adaptive tanh-sinh in ``x = s - m`` on dyadic subintervals toward ``x = 0``."""
    with mpmath.workdps(dps):
        m, p = mpmath.mpf(m), 1 - mpmath.mpf(lam)
        X = mpmath.mpf(U) - m
        if m == 0:
            f = lambda x: x ** (-p / 2)
        else:
            f = lambda x: 1 / mpmath.sqrt(m ** p * mpmath.expm1(p * mpmath.log1p(x / m)))
        pts = [mpmath.mpf(0)] + [X * mpmath.mpf(2) ** (-k) for k in range(24, -1, -1)]
        return float(mpmath.quad(f, pts))


def mp_integral_J(L, M, lam, dps=20):
    """Same scheme in ``x = M - s``."""
    with mpmath.workdps(dps):
        M, p = mpmath.mpf(M), 1 - mpmath.mpf(lam)
        X = M - mpmath.mpf(L)
        f = lambda x: 1 / mpmath.sqrt(-M ** p * mpmath.expm1(p * mpmath.log1p(-x / M)))
        pts = [mpmath.mpf(0)] + [X * mpmath.mpf(2) ** (-k) for k in range(24, -1, -1)]
        return float(mpmath.quad(f, pts))


def reduced_det(lam, w, a):
    """Finite-difference determinant of the 4x4 beta = 0 map in (x, y, gamma, delta).

    With f = gamma + delta sigma the residuals are
    (int f, (1/T) int f^2 - c, gamma - y, delta - ((1+lam)/2)/(a+x)).
    Moments of sigma come from scipy quad on the weight's sigma, not from
    the package's cached functionals.
    """
    T = w.period
    brk = list(w.base.nodes[1:])
    s1 = quad(lambda t: float(w.sigma(t)), 0, T, points=brk, limit=200, epsabs=1e-13)[0]
    s2 = quad(lambda t: float(w.sigma(t)) ** 2, 0, T, points=brk, limit=200, epsabs=1e-13)[0]
    sbar = s1 / T
    alpha = s2 / T - sbar ** 2
    c = (1 + lam) ** 2 / (4 * lam)
    mu = (1 + lam) / 2

    def R(z):
        x, y, g, d = z
        i1 = g * T + d * s1
        i2 = g * g * T + 2 * g * d * s1 + d * d * s2
        return np.array([i1, i2 / T - c, g - y, d - mu / (a + x)])

    sq = math.sqrt(lam * alpha)
    d0 = (1 + lam) / (2 * sq)
    z0 = np.array([sq - a, -sbar * d0, -sbar * d0, d0])
    J = np.empty((4, 4))
    for j in range(4):
        e = np.zeros(4)
        e[j] = 1e-6 * (1 + abs(z0[j]))
        J[:, j] = (R(z0 + e) - R(z0 - e)) / (2 * e[j])
    return float(np.linalg.det(J)), np.abs(R(z0)).max()


def trapz_cum(t, y):
    return np.concatenate([[0.0], np.cumsum(np.diff(t) * (y[:-1] + y[1:]) / 2)])
