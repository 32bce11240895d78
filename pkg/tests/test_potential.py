import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shrinkerlab import (DomainError, Params, chicone_criterion, energy_slope_at_minimum,
                         equilibria, first_integral, k_plus, min_potential, potential,
                         potential_at, sho_limit_angle)

lams = st.floats(-50, 50, allow_nan=False)


@pytest.mark.parametrize("kw", [{"tol_root": 0.0}, {"tol_quad": -1e-9}, {"tol_ode": 1e-3}])
def test_params_rejects_bad_tolerances(kw):
    with pytest.raises(DomainError):
        Params(0.0, **kw)


@pytest.mark.parametrize("lam", [math.inf, math.nan])
def test_params_rejects_nonfinite_lambda(lam):
    with pytest.raises(DomainError):
        Params(lam)


def test_equilibria_at_zero():
    eq = equilibria(Params(0.0))
    assert eq.k_plus == 1.0 and eq.k_minus == -1.0
    assert eq.min_V == 1.0


def test_equilibria_three_halves():
    eq = equilibria(Params(1.5))
    assert eq.k_plus == pytest.approx(2.0, abs=1e-15)
    assert eq.k_minus == pytest.approx(-0.5, abs=1e-15)
    assert abs(potential_at(Params(1.5), eq.k_plus).v1) <= 1e-12


def test_equilibria_threshold_lambda():
    lam = -2.0 / math.sqrt(3.0)
    eq = equilibria(Params(lam))
    assert eq.k_plus == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-15)
    assert eq.k_plus * -eq.k_minus == pytest.approx(1.0, abs=1e-12)


@given(lams)
def test_equilibria_invariants(lam):
    eq = equilibria(Params(lam))
    assert eq.k_plus > 0 > eq.k_minus
    assert abs(eq.k_plus * eq.k_minus + 1.0) <= 1e-12
    assert eq.nu_plus == eq.k_plus and eq.nu_minus == eq.k_minus
    assert abs(potential_at(Params(lam), eq.k_plus).v1) <= 1e-12 * max(1.0, abs(lam))
    expect = -lam * eq.k_plus - 2.0 * math.log(eq.k_plus) + 1.0
    assert abs(eq.min_V - expect) <= 1e-12 * max(1.0, abs(expect))


def test_k_plus_stable_for_large_negative_lambda():
    # naive (lam + sqrt(lam^2+4))/2 loses every digit here
    assert k_plus(-1e8) == pytest.approx(1e-8, rel=1e-14)


def test_potential_at_minimum_of_symmetric_case():
    pt = potential_at(Params(0.0), 1.0)
    assert (pt.v, pt.v1, pt.v2, pt.v3, pt.v4) == (1.0, 0.0, 4.0, -4.0, 12.0)


def test_potential_values():
    assert potential_at(Params(0.0), 2.0).v == pytest.approx(4 - 2 * math.log(2), abs=1e-15)
    pt = potential_at(Params(1.0), 1.0)
    assert (pt.v, pt.v1) == (-1.0, -2.0)


@pytest.mark.parametrize("u", [0.0, -1.0, 1e-301])
def test_potential_at_rejects_tiny_or_negative(u):
    with pytest.raises(DomainError):
        potential_at(Params(0.0), u)


@pytest.mark.parametrize("lam", [-3.0, 0.0, 2.0])
@pytest.mark.parametrize("u", [0.05, 0.7, 3.0, 50.0])
def test_derivatives_match_finite_differences(lam, u):
    p, h = Params(lam), 1e-5 * u
    f = lambda x, d: [potential_at(p, x).v, potential_at(p, x).v1, potential_at(p, x).v2,
                      potential_at(p, x).v3][d]
    pt = potential_at(p, u)
    for d, exact in enumerate([pt.v1, pt.v2, pt.v3, pt.v4]):
        fd = (f(u + h, d) - f(u - h, d)) / (2 * h)
        assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


def test_potential_vectorised_and_convex():
    u = np.geomspace(1e-3, 1e3, 400)
    v = potential(0.3, u)
    assert v.shape == u.shape
    assert np.all(2 + 2 / u**2 > 0)
    assert np.argmin(v) == np.argmin(np.abs(u - k_plus(0.3)))


def test_first_integral():
    assert first_integral(Params(0.7), 3.0, 0.7) == 0.0
    assert first_integral(Params(0.0), 0.0, -1.0) == pytest.approx(math.exp(-0.5), rel=1e-15)


def test_first_integral_and_energy_agree():
    # eta = -2 log F - lam^2 on the half plane nu < lam
    p = Params(0.4)
    tau, k = 0.3, 1.7
    eta = tau**2 + potential(p.lam, k)
    F = first_integral(p, tau, p.lam - k)
    assert -2 * math.log(F) - p.lam**2 == pytest.approx(eta, rel=1e-14)


def test_sho_limit_special_values():
    assert sho_limit_angle(Params(0.0)) == pytest.approx(math.sqrt(2) * math.pi, rel=1e-15)
    assert sho_limit_angle(Params(-2 / math.sqrt(3))) == pytest.approx(math.pi, rel=1e-14)
    assert sho_limit_angle(Params(-7 / (2 * math.sqrt(2)))) == pytest.approx(2 * math.pi / 3,
                                                                             rel=1e-14)


def test_sho_limit_monotone_with_extreme_limits():
    vals = np.array([sho_limit_angle(Params(l)) for l in np.arange(-20, 20.001, 0.01)])
    assert np.all(np.diff(vals) > 0)
    assert 0 < sho_limit_angle(Params(-1e6)) < 1e-5
    assert 0 < 2 * math.pi - sho_limit_angle(Params(1e6)) < 1e-5


def test_chicone_criterion_values():
    assert chicone_criterion(Params(0.0)) == pytest.approx(-112.0, rel=1e-15)
    assert chicone_criterion(Params(1.5)) == pytest.approx(-6.25, rel=1e-14)
    grid = np.arange(-10, 10.001, 0.1)
    assert all(chicone_criterion(Params(l)) < 0 for l in grid)


def test_energy_slope_changes_sign_where_k_plus_is_one_third():
    # 5 V3^2 - 3 V2 V4 vanishes at k_plus = 1/3, i.e. lam = 1/3 - 3
    lam0 = 1.0 / 3.0 - 3.0
    assert energy_slope_at_minimum(Params(lam0 + 0.01)) < 0
    assert energy_slope_at_minimum(Params(lam0 - 0.01)) > 0
    assert energy_slope_at_minimum(Params(0.0)) == pytest.approx(-0.18512, abs=1e-5)


@settings(max_examples=50)
@given(lams)
def test_min_potential_is_minimum(lam):
    k = k_plus(lam)
    vmin = min_potential(lam)
    for u in (0.5 * k, 0.9 * k, 1.1 * k, 2 * k):
        assert potential(lam, u) >= vmin
