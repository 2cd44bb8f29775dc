import json
import math

import numpy as np
import pytest

from weaksing.bounds import check_branch_point
from weaksing.continuation import (TraceOptions, classify_termination, point_at, solve_equation2,
                                   trace_branch)
from weaksing.errors import BadParameter, BetaUnreachable
from weaksing.timemap import TwoValueProblem, reconstruct, solve_two_value
from weaksing.transform import residual_eq, rho_to_u
from weaksing.weights import decompose, equal_pieces, square_wave


@pytest.fixture(scope="module")
def br36():
    return trace_branch(0.5, square_wave(36), beta_target=1.05)


def test_reaches_target(br36):
    assert br36.termination == "BetaTarget"
    assert br36.points[-1].beta == 1.05
    assert br36.beta_star_empirical >= 1.0
    assert all(p.residual_norm <= 1e-10 for p in br36.points)
    assert all(p.m_rho > br36.floor for p in br36.points)


def test_branch_continuity(br36):
    betas = br36.betas
    assert betas[0] == 0 and np.all(np.diff(betas) > 0)
    S = br36.system
    for p0, p1, step in zip(br36.points[:-1], br36.points[1:], br36.steps[1:]):
        d = np.concatenate([[p1.beta - p0.beta], S.pack(p1) - S.pack(p0)])
        dist = math.sqrt(d[0] ** 2 + d[1] ** 2 + d[2] ** 2 + np.mean(d[3:] ** 2))
        assert dist <= 2 * step
    assert np.all(np.diff(br36.arclength) > 0)


def test_a_priori_bounds_along_branch(br36):
    w = square_wave(36)
    for p in br36.points:
        assert check_branch_point(0.5, p, w, br36.system.a)["ok"]


def test_beta_target_zero():
    b = trace_branch(0.5, square_wave(36), beta_target=0)
    assert len(b.points) == 1 and b.termination == "BetaTarget"


def test_floor_dominates():
    w = square_wave(2)
    b = trace_branch(0.5, w, floor=10.0)
    assert b.termination == "MinRhoFloor" and len(b.points) == 1
    rep = classify_termination(b)
    assert "alternative (ii)" in rep["reading"]
    assert rep["m_rho_last"] <= 2 * b.floor


def test_small_weight_ends_at_floor():
    # +-2 square wave: the branch runs into the positivity boundary
    b = trace_branch(0.5, square_wave(2))
    assert b.termination == "MinRhoFloor"
    assert b.points[-1].m_rho < b.floor
    assert b.beta_star_empirical > 2 * 0.25 / (4 * 2.25)


def test_normcap_reading():
    # seed norm is 2 sqrt(lambda alpha) ~ 7.35; beta + norm passes 7.4 almost at once
    b = trace_branch(0.5, square_wave(36), cap=7.4)
    assert b.termination == "NormCap"
    assert "alternative (i)" in classify_termination(b)["reading"]


def test_outputs(tmp_path, br36):
    br36.to_jsonl(tmp_path / "b.jsonl")
    br36.to_csv(tmp_path / "b.csv")
    lines = (tmp_path / "b.jsonl").read_text().splitlines()
    assert len(lines) == len(br36.points)
    assert json.loads(lines[-1])["beta"] == 1.05
    head = (tmp_path / "b.csv").read_text().splitlines()[0]
    assert head == "beta,m_rho,x,y,f_inf,residual"


def test_point_at_interpolates(br36):
    p = point_at(br36, 0.8)
    assert p.beta == 0.8 and p.residual_norm <= 1e-10
    with pytest.raises(BetaUnreachable):
        point_at(br36, 2.0)


def test_solve_equation2_matches_timemap(br36):
    w = square_wave(36)
    v = solve_equation2(0.5, w, 1.0, branch=br36)
    ref = reconstruct(solve_two_value(TwoValueProblem(0.5, 1.0, 0.5, 35.0, 37.0)))
    assert np.max(np.abs(np.interp(ref.t, v.t, v.u) - ref.u)) <= 1e-6
    assert residual_eq(v) <= 1e-6
    assert max(v.periodicity_defect()) <= 1e-8
    assert v.meta.equation == "shifted"


def test_unpolished_profile_second_order():
    w = square_wave(36)
    ref = reconstruct(solve_two_value(TwoValueProblem(0.5, 1.0, 0.5, 35.0, 37.0)))
    errs = []
    for n in (128, 256, 512):
        v = solve_equation2(0.5, w, 1.0, n=n, polish=False)
        errs.append(np.max(np.abs(v.u - np.interp(v.t, ref.t, ref.u))))
    assert errs[1] < errs[0] / 3 and errs[2] < errs[1] / 3


def test_pre_scaling_solves_beta_family(br36):
    S = br36.system
    p = point_at(br36, 1.0)
    u = rho_to_u(S.rho_solution(p))
    assert u.meta.equation == "beta_family"
    # collocation accuracy at N=256 bounds this residual (second order)
    assert residual_eq(u) < 1e-2
    assert residual_eq(S.rho_solution(p)) < 1e-2


def test_solve_equation2_errors(br36):
    with pytest.raises(BadParameter):
        solve_equation2(0.5, square_wave(36), 0.0)
    with pytest.raises(BetaUnreachable):
        solve_equation2(0.5, square_wave(36), 1.5, branch=br36)


def test_three_piece_weight():
    # equal thirds (10, 5, -20): mean -5/3, solved through the branch at beta = 5/3
    mean, w = decompose(equal_pieces([10, 5, -20], 1))
    v = solve_equation2(0.5, w, -mean)
    assert residual_eq(v) <= 1e-5
    assert max(v.periodicity_defect()) <= 1e-8


def test_large_weight_branch_ends_at_floor_far_out():
    # +-36: the branch stays bounded and reaches the floor near beta ~ 20.3
    b = trace_branch(0.5, square_wave(36))
    assert b.termination == "MinRhoFloor"
    assert 15 < b.points[-1].beta < 25
    assert max(p.norm() for p in b.points) < 10
