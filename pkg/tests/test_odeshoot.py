from fractions import Fraction

import numpy as np
import pytest

from weaksing.bounds import beta_star_eq62
from weaksing.errors import BadParameter, FloorHit, NoConvergence
from weaksing.odeshoot import ShootState, cold_start, integrate, period_map, shoot
from weaksing.timemap import TwoValueProblem, reconstruct, solve_two_value
from weaksing.transform import residual_eq
from weaksing.weights import equal_pieces, two_value

EXW = two_value(35, 37)


@pytest.fixture(scope="module")
def tm():
    return reconstruct(solve_two_value(TwoValueProblem(0.5, 1.0, 0.5, 35.0, 37.0)))


def test_zero_forcing_constant():
    tr = integrate(0.5, equal_pieces([0], 1), 2.0, 0.0, t_out=np.linspace(0.1, 1, 10))
    assert np.all(tr.u == 2.0) and np.all(tr.du == 0.0)


def test_tolerance_self_consistency():
    # short horizon under constant negative forcing: tightening the tolerance changes little
    h = equal_pieces([-3], Fraction(1, 4))
    t = np.linspace(0.025, 0.25, 10)
    a = integrate(0.5, h, 1.0, 0.3, t_out=t, rtol=1e-12)
    b = integrate(0.5, h, 1.0, 0.3, t_out=t, rtol=1e-14)
    assert np.max(np.abs(a.u - b.u)) <= 1e-10
    assert np.max(np.abs(a.du - b.du)) <= 1e-10


def test_floor_hit():
    with pytest.raises(FloorHit) as exc:
        integrate(0.5, equal_pieces([-10], 1), 0.01, -1.0)
    assert 0 < exc.value.t < 1


def test_bad_inputs():
    with pytest.raises(BadParameter):
        integrate(0.5, EXW, 1.0, 0.0, u_floor=2.0)
    with pytest.raises(BadParameter):
        integrate(1.0, EXW, 1.0, 0.0)
    with pytest.raises(BadParameter):
        integrate(0.5, EXW, 1.0, 0.0, t_out=[0.0])
    with pytest.raises(BadParameter):
        ShootState(-1.0, 0.0)


def test_negative_constant_has_no_periodic_solution():
    with pytest.raises((NoConvergence, FloorHit)):
        shoot(0.5, equal_pieces([-1], 1))


def test_warm_start_from_timemap(tm):
    sol = shoot(0.5, EXW, ShootState(float(tm.u[0]), float(tm.du[0])))
    assert sol.diagnostics["iterations"] <= 3
    assert max(abs(d) for d in sol.diagnostics["defect"]) <= 1e-10


def test_cold_start_matches_timemap(tm):
    sol = shoot(0.5, EXW)
    assert cold_start(0.5, EXW) > 0
    assert np.max(np.abs(sol.u - tm.u)) <= 1e-6
    assert residual_eq(sol) <= 1e-6
    assert max(sol.periodicity_defect()) <= 1e-8
    assert sol.diagnostics["solver"] == "odeshoot"


def test_period_map_fixed_point(tm):
    uT, vT = period_map(0.5, EXW, float(tm.u[0]), float(tm.du[0]))
    assert abs(uT - tm.u[0]) <= 1e-9 and abs(vT - tm.du[0]) <= 1e-8


@pytest.mark.parametrize("ht", [(30, 10, -40), (50, -20, -30), (20, 20, -10, -30)])
def test_n_piece_within_estimate(ht):
    lam = Fraction(1, 2)
    bs = beta_star_eq62(lam, ht)
    beta = 0.9 * float(bs)
    h = equal_pieces([v - beta for v in ht], 1)
    assert h.mean() == pytest.approx(-beta, rel=1e-12)
    sol = shoot(0.5, h)
    assert np.all(sol.u > 0)
    assert residual_eq(sol) <= 1e-6
    assert max(sol.periodicity_defect()) <= 1e-8


def test_csv(tmp_path):
    tr = integrate(0.5, EXW, 2.0, 0.0, t_out=[0.5, 1.0])
    tr.to_csv(tmp_path / "tr.csv")
    rows = (tmp_path / "tr.csv").read_text().splitlines()
    assert rows[0] == "t,u,du" and len(rows) == 1 + len(tr.t)
