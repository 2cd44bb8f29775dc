import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_two_value as random_problem
from oracles import mp_integral_I, mp_integral_J
from weaksing.errors import BadMean, BadParameter
from weaksing.odeshoot import ShootState, shoot
from weaksing.timemap import (TwoValueProblem, from_weight, integral_I, integral_J, m_cap,
                              reconstruct, solve_two_value, solution_json)
from weaksing.transform import residual_eq
from weaksing.weights import equal_pieces, two_value

EX = TwoValueProblem(0.5, 1.0, 0.5, 35.0, 37.0)


@pytest.fixture(scope="module")
def ex():
    sol = solve_two_value(EX)
    return sol, reconstruct(sol)


# --- integrals

def test_integral_closed_forms():
    assert integral_I(0.0, 1.0, 0.5) == pytest.approx(4 / 3, rel=1e-12)
    assert integral_I(2.0, 2.0, 0.5) == 0.0
    assert integral_J(3.0, 3.0, 0.5) == 0.0
    for lam in (0.2, 0.5, 0.8):
        p = 1 - lam
        # J(0, M) = M^((1+lam)/2) B(1/p, 1/2)/p
        ref = 5.0 ** ((1 + lam) / 2) * math.gamma(1 / p) * math.gamma(0.5) / math.gamma(1 / p + 0.5) / p
        assert integral_J(0.0, 5.0, lam) == pytest.approx(ref, rel=1e-12)


def test_integrals_vs_mpmath():
    assert integral_I(1.0, 2.0, 0.5) == pytest.approx(float(mp_integral_I(1.0, 2.0, 0.5)), rel=1e-10)
    assert integral_J(0.0, 1.0, 0.5) == pytest.approx(float(mp_integral_J(0.0, 1.0, 0.5)), rel=1e-10)


@settings(max_examples=25)
@given(st.floats(0.0, 10.0), st.floats(1e-3, 10.0), st.floats(0.05, 0.95))
def test_J_exceeds_I(L, d, lam):
    M = L + d
    assert integral_J(L, M, lam) > integral_I(L, M, lam)


def test_integral_errors():
    with pytest.raises(BadParameter):
        integral_I(2.0, 1.0, 0.5)
    with pytest.raises(BadParameter):
        integral_J(0.0, 0.0, 0.5)
    with pytest.raises(BadParameter):
        integral_I(0.0, 1.0, 1.0)


# --- solve

def test_example_solution(ex):
    sol, _ = ex
    assert 0 < sol.m < sol.u_eta < sol.M
    assert max(abs(r) for r in sol.residuals) <= 1e-11
    assert sol.matching_defect() <= 1e-12
    assert sol.m <= m_cap(EX)
    assert sol.n_roots >= 1 and sol.roots[0] == (sol.m, sol.M)


def test_bad_mean_and_parameters():
    with pytest.raises(BadMean):
        solve_two_value(TwoValueProblem(0.5, 1.0, 0.5, 37.0, 35.0))
    with pytest.raises(BadMean):
        solve_two_value(TwoValueProblem(0.5, 1.0, 0.5, 36.0, 36.0))
    with pytest.raises(BadParameter):
        TwoValueProblem(0.5, 1.0, 1.0, 1.0, 2.0)
    with pytest.raises(BadParameter):
        TwoValueProblem(1.5, 1.0, 0.5, 1.0, 2.0)


@pytest.mark.parametrize("c", [0.25, 4.0, 10.0])
def test_scaling(c, ex):
    sol, _ = ex
    s2 = solve_two_value(TwoValueProblem(0.5, 1.0, 0.5, 35.0 * c, 37.0 * c))
    k = c ** (1 / 1.5)
    assert s2.m == pytest.approx(k * sol.m, rel=1e-10)
    assert s2.M == pytest.approx(k * sol.M, rel=1e-10)
    # time conditions scale as 1/sqrt(c): the rescaled pair solves the original integrals
    c1, c2 = EX.time_targets()
    assert integral_I(s2.m / k, s2.u_eta / k, 0.5) == pytest.approx(c1, rel=1e-10)
    assert integral_J(s2.u_eta / k, s2.M / k, 0.5) == pytest.approx(c2, rel=1e-10)


def test_from_weight():
    pr = from_weight(0.5, two_value(35, 37))
    assert pr == EX
    with pytest.raises(BadParameter):
        from_weight(0.5, equal_pieces([-1, 1], 1))


# --- reconstruction

def test_structure(ex):
    sol, u = ex
    n = len(u.t) - 1
    h = EX.T / n
    i_eta = int(round(EX.eta / h))
    assert abs(u.u[0] - u.u[i_eta]) <= 1e-10
    assert abs(u.u[0] - u.u[-1]) <= 1e-10
    assert abs(u.t[np.argmin(u.u)] - sol.t_min) <= h
    assert abs(u.t[np.argmax(u.u)] - sol.t_max) <= h
    assert u.u[np.argmin(np.abs(u.t - sol.t_min))] == pytest.approx(sol.m, rel=1e-13)
    assert u.u[np.argmin(np.abs(u.t - sol.t_max))] == pytest.approx(sol.M, rel=1e-13)
    assert abs(u.du[np.argmin(np.abs(u.t - sol.t_min))]) <= 1e-6
    assert max(u.periodicity_defect()) <= 1e-8
    assert residual_eq(u) <= 1e-6


def test_explicit_nodes_hit_extrema(ex):
    sol, _ = ex
    u = reconstruct(sol, t=[sol.t_min, sol.t_max])
    assert u.u[0] == pytest.approx(sol.m, rel=1e-14) and u.du[0] == 0
    assert u.u[1] == pytest.approx(sol.M, rel=1e-14) and abs(u.du[1]) <= 1e-12


def test_energy_conservation(ex):
    sol, u = ex
    p = 0.5
    _, ref = ex
    sh = shoot(0.5, EX.weight, ShootState(float(ref.u[0]), float(ref.du[0])), grid_n=len(ref.t) - 1)
    for uu in (u, sh):
        first = uu.t < EX.eta
        for mask, hv in ((first & (uu.t > 0), 35.0), (~first & (uu.t > EX.eta), -37.0)):
            E = uu.du[mask] ** 2 / 2 - hv * uu.u[mask] ** p / p
            assert np.ptp(E) <= 1e-8 * max(1.0, np.max(np.abs(E)))


def test_json(ex):
    sol, u = ex
    import json
    d = json.loads(solution_json(sol, u))
    assert d["summary"]["m"] == sol.m and "solution" in d


def test_equivalence_with_shooting_random():
    rng = np.random.default_rng(20261016)
    for _ in range(10):
        pr = random_problem(rng)
        ref = reconstruct(solve_two_value(pr), grid_n=2048)
        sh = shoot(pr.lam, pr.weight, grid_n=2048)
        assert np.max(np.abs(sh.u - ref.u)) <= 1e-6, pr


@pytest.mark.parametrize("m", [1e-300, 1e-310, 5e-324])
def test_tiny_minimum_is_continuous(m):
    # subnormal anchors must not overflow the integrand; I(m, U) -> I(0, U)
    assert integral_I(m, m + 1e-3, 0.05) == pytest.approx(integral_I(0.0, 1e-3, 0.05), rel=1e-12)
