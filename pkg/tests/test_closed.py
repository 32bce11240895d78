import math

import numpy as np
import pytest

from shrinkerlab import (BracketError, DomainError, Params, delta_theta, energy_level,
                         enumerate_closed, find_closed, min_potential, sho_limit_angle,
                         solve_eta_for_angle, theta_profile, validate_theorems)
from shrinkerlab.closed import regime, solve_eta_rel_for_angle


def _angle_at(p, eta):
    return delta_theta(p, energy_level(p, eta)).delta_theta


@pytest.fixture(scope="module")
def profile_zero():
    return theta_profile(Params(0.0))


def test_profile_starts_at_sho_limit(profile_zero):
    assert abs(profile_zero.delta_theta[0] - sho_limit_angle(Params(0.0))) <= 1e-3
    assert np.all((profile_zero.delta_theta > math.pi)
                  & (profile_zero.delta_theta < math.sqrt(2) * math.pi))
    assert profile_zero.monotone_flags.shape == (199,)


def test_profile_positive_lambda_above_pi():
    assert theta_profile(Params(1.0), 1e-6, 1e6, 60).observed_min > math.pi


def test_profile_lambda_minus_three():
    prof = theta_profile(Params(-3.0))
    assert prof.observed_min < 2 * math.pi / 3
    assert abs(prof.delta_theta[-1] - math.pi) < 0.01


def test_profile_rejects_bad_grid():
    with pytest.raises(DomainError):
        theta_profile(Params(0.0), 1.0, 0.5, 10)


@pytest.mark.parametrize("lam,target", [(-0.5, math.pi), (-5.0, math.pi / 2),
                                        (0.19, 4 * math.pi / 3)])
def test_solve_eta_for_angle(lam, target):
    p = Params(lam)
    br = theta_profile(p, 1e-6, 1e6, 60).crossings(target)[0]
    lo, hi = (min_potential(lam) + b for b in br)
    eta = solve_eta_for_angle(p, target, (lo, hi))
    assert lo <= eta <= hi
    assert abs(_angle_at(p, eta) - target) <= 1e-9


def test_solve_without_straddle_raises():
    with pytest.raises(BracketError):
        solve_eta_rel_for_angle(Params(0.0), math.pi / 2, (0.1, 10.0))


def test_solve_returns_first_crossing_from_lower_end():
    # lam = -2: the angle dips below its limit at the minimum, then climbs to pi
    p = Params(-2.0)
    prof = theta_profile(p)
    target = 0.5 * (prof.observed_min + sho_limit_angle(p))
    brs = prof.crossings(target)
    assert len(brs) == 2
    e = solve_eta_rel_for_angle(p, target, (brs[0][0], brs[1][1]))
    assert brs[0][0] <= e <= brs[0][1]
    e_rev = solve_eta_rel_for_angle(p, target, (brs[1][1], brs[0][0]))
    assert brs[1][0] <= e_rev <= brs[1][1]


def test_enumerate_symmetric_case_has_no_embedded():
    sols = enumerate_closed(Params(0.0), m_max=9, n_max=5)
    assert sols
    assert all(s.rotation_index != 1 and not s.embedded for s in sols)
    assert all(0.5 < s.n / s.m < 1 / math.sqrt(2) for s in sols)
    assert [(s.m, s.n) for s in sols] == sorted((s.m, s.n) for s in sols)


@pytest.mark.parametrize("lam,m", [(-0.5, 2), (-3.0, 3)])
def test_enumerate_contains_embedded(lam, m):
    sols = enumerate_closed(Params(lam), m_max=m, n_max=1)
    hit = [s for s in sols if (s.n, s.m) == (1, m)]
    assert hit and hit[0].embedded and hit[0].symmetry_order == m


def test_closed_solution_invariants():
    for s in find_closed(Params(0.726), 3, 4):
        assert math.gcd(s.n, s.m) == 1
        assert abs(s.delta_theta - 2 * math.pi * s.n / s.m) <= 1e-9
        assert s.curve.closed and abs(s.curve.total_turning - 2 * math.pi * s.n) <= 1e-6
        assert s.rotation_index == s.n and s.symmetry_order == s.m
        assert not s.embedded and s.curve.intersection is not None


def test_find_closed_reduces_fraction():
    a = find_closed(Params(-0.5), 2, 4)
    assert a and (a[0].n, a[0].m) == (1, 2)


def test_regimes():
    assert regime(0.5) == regime(0.0) == "no-embedded"
    assert regime(-0.5) == "embedded-2-symmetric"
    assert regime(-1.5) == "probe"
    assert regime(-3.0) == "embedded-m-symmetric"


def test_validate_theorems_report():
    rep = validate_theorems([-0.5, 1.0, -5.0, -2.0], m_max=6, n_max=3)
    by = {e["lambda"]: e for e in rep["entries"]}
    assert by[-0.5]["pass"] and by[1.0]["pass"] and by[-5.0]["pass"]
    assert by[-2.0]["pass"] is None
    assert rep["pass"]


def test_enumeration_is_deterministic():
    a = enumerate_closed(Params(0.19), m_max=6, n_max=4)
    b = enumerate_closed(Params(0.19), m_max=6, n_max=4)
    assert [s.eta_star for s in a] == [s.eta_star for s in b]
