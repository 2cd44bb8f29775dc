import numpy as np
import pytest
from hypothesis import given, strategies as st

from weaksing.errors import BadParameter, GridTooCoarse, NonPositive
from weaksing.transform import (PeriodicSolution, RhoSolution, SolutionMeta, beta_scale,
                                residual_eq, rho_to_u, second_difference, u_to_rho)
from weaksing.weights import square_wave, two_value


def _profile(lam=0.5, n=64):
    t = np.linspace(0, 1, n + 1)
    u = 2 + np.sin(2 * np.pi * t)
    du = 2 * np.pi * np.cos(2 * np.pi * t)
    return PeriodicSolution(lam, 1.0, t, u, du, SolutionMeta("plain", two_value(1, 3)))


@given(st.floats(0.05, 0.95))
def test_rho_roundtrip(lam):
    s = _profile(lam)
    back = rho_to_u(u_to_rho(s))
    assert np.allclose(back.u, s.u, rtol=1e-13)
    assert np.allclose(back.du, s.du, rtol=1e-12, atol=1e-12)


@given(st.floats(0.05, 0.95), st.floats(0.01, 100))
def test_beta_scale(lam, beta):
    s = _profile(lam)
    meta = SolutionMeta("beta_family", square_wave(2.0), beta)
    s = PeriodicSolution(lam, 1.0, s.t, s.u, s.du, meta)
    v = beta_scale(s)
    assert v.meta.equation == "shifted"
    assert np.allclose(v.u * beta ** (1 / (1 + lam)), s.u, rtol=1e-13)


def test_non_positive_rejected():
    t = np.linspace(0, 1, 5)
    with pytest.raises(NonPositive):
        PeriodicSolution(0.5, 1.0, t, np.array([1, 1, 0, 1, 1.0]), np.zeros(5),
                         SolutionMeta("plain", two_value(1, 3)))


def test_meta_validation():
    with pytest.raises(BadParameter):
        SolutionMeta("shifted", square_wave(2.0), 0.0)
    with pytest.raises(BadParameter):
        SolutionMeta("eq9", square_wave(2.0), 1.0)


def test_forcing_families():
    w = square_wave(2.0)
    assert SolutionMeta("shifted", w, 0.5).forcing()(0.1) == pytest.approx(1.5)
    assert SolutionMeta("beta_family", w, 0.5).forcing()(0.7) == pytest.approx(-0.25 - 1.0)


def test_second_difference_exact_on_quadratics():
    t = np.sort(np.random.default_rng(1).uniform(0, 1, 40))
    assert np.allclose(second_difference(t, 3 * t ** 2 - t), 6.0)


def test_residual_manufactured():
    # u = 2 + sin(2 pi t) solves u'' = g/u^lam with g = -4 pi^2 sin(2 pi t) u^lam,
    # sampled as a fine Sampled weight; the residual is the stencil error O(h^2)
    from weaksing.weights import Sampled
    lam, n = 0.5, 1024
    tg = np.arange(4096) / 4096
    g = -4 * np.pi ** 2 * np.sin(2 * np.pi * tg) * (2 + np.sin(2 * np.pi * tg)) ** lam
    s = _profile(lam, n)
    r = residual_eq(s, forcing=Sampled(1.0, g))
    assert r < 1e-3
    r2 = residual_eq(_profile(lam, 2 * n), forcing=Sampled(1.0, g))
    assert r2 < r / 3


def test_residual_masks_jumps():
    s = _profile(0.5, 64)
    _, prof = residual_eq(s, forcing=two_value(1, 3), return_profile=True)
    assert np.isnan(prof[31])  # node 32 sits on the jump at t = 1/2
    assert not np.isnan(prof[10])


def test_residual_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        residual_eq(_profile(0.5, 16))


def test_csv_and_json(tmp_path):
    s = _profile()
    s.to_csv(tmp_path / "s.csv")
    head = (tmp_path / "s.csv").read_text().splitlines()[0]
    assert head == "t,u,du"
    d = np.loadtxt(tmp_path / "s.csv", delimiter=",", skiprows=1)
    assert np.array_equal(d[:, 1], s.u)
    import json
    j = json.loads(s.to_json())
    assert j["meta"]["equation"] == "plain" and len(j["u"]) == 65
