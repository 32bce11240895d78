import io
import math

import numpy as np
import pytest
from shapely.geometry import LinearRing

from shrinkerlab import (ConservationError, DomainError, Params, PhaseState, circle_curve,
                         delta_theta, detect_symmetry_order, energy_level, equation_residual,
                         find_self_intersection, integrate_period, is_embedded, k_plus,
                         phase_rhs, reconstruct_curve, symmetry_mismatch, write_curve_csv)
from shrinkerlab.closed import solve_eta_rel_for_angle, theta_profile
from shrinkerlab.flow import MAX_CONSISTENCY


def _closed_level(lam, n, m):
    p = Params(lam)
    target = 2 * math.pi * n / m
    br = theta_profile(p, 1e-6, 1e6, 60).crossings(target)[0]
    return p, energy_level(p, eta_rel=solve_eta_rel_for_angle(p, target, br))


@pytest.fixture(scope="module")
def two_symmetric():
    p, lv = _closed_level(-0.5, 1, 2)
    return p, lv, reconstruct_curve(p, lv, 2)


def test_phase_rhs_examples():
    lam = 0.3
    d = phase_rhs(Params(lam), PhaseState(0, 0.0, k_plus(lam), 0.0, 0.0, 0.0))
    assert abs(d[0]) < 1e-15 and d[1] == 0.0
    assert phase_rhs(Params(0.0), PhaseState(0, 0.0, 2.0, 0.0, 0.0, 0.0))[:2] == (-3.0, 0.0)
    assert phase_rhs(Params(1.0), PhaseState(0, 1.0, 1.0, 0.0, 0.0, 0.0))[:2] == (1.0, 1.0)


def test_phase_rhs_rejects_nonpositive_curvature():
    with pytest.raises(DomainError):
        phase_rhs(Params(0.0), PhaseState(0, 0.0, 0.0, 0.0, 0.0, 0.0))


def test_period_matches_quadrature_at_moderate_energy():
    p = Params(0.0)
    lv = energy_level(p, 2.0)
    tr = integrate_period(p, lv)
    q = delta_theta(p, lv)
    assert abs(tr.delta_theta_ode - q.delta_theta) <= 1e-8
    assert abs(tr.arc_length_ode - q.arc_length) <= 1e-8
    assert tr.f_drift <= 1e-9
    assert tr.consistency_residual <= MAX_CONSISTENCY


def test_period_near_minimum_gives_sho_angle():
    p = Params(0.0)
    tr = integrate_period(p, energy_level(p, 1 + 1e-8))
    assert abs(tr.delta_theta_ode - math.sqrt(2) * math.pi) <= 1e-3


@pytest.mark.parametrize("lam,eta_rel", [(-3.0, 5.0), (1.0, 0.3), (0.0, 50.0)])
def test_trajectory_shape(lam, eta_rel):
    p = Params(lam)
    lv = energy_level(p, eta_rel=eta_rel)
    tr = integrate_period(p, lv)
    assert tr.tau[0] == 0.0 and abs(tr.tau[-1]) < 1e-10
    assert tr.k[0] == pytest.approx(lv.u_plus, rel=1e-15)
    assert abs(tr.k_min - lv.u_minus) <= 1e-8 and abs(tr.k_max - lv.u_plus) <= 1e-8
    # start point on the y-axis at signed offset lam - u_plus
    assert tr.x[0] == 0.0 and tr.y[0] == pytest.approx(lam - lv.u_plus)
    states = list(tr.states())
    assert len(states) == len(tr.s)


def test_second_period_reproduces_start():
    p = Params(-3.0)
    lv = energy_level(p, eta_rel=10.0)
    c = reconstruct_curve(p, lv, 2)
    n = len(c.s) // 2
    assert abs(c.tau[n] - c.tau[0]) <= 1e-10
    assert abs(c.k[n] - c.k[0]) <= 1e-10 * c.k[0]


def test_degenerate_level_rejected_by_integrator():
    p = Params(0.0)
    with pytest.raises(DomainError):
        integrate_period(p, energy_level(p, 1.0))


def test_loose_tolerance_trips_conservation():
    p = Params(0.0, tol_ode=1e-4)
    lv = energy_level(p, eta_rel=10.0)
    with pytest.raises(ConservationError) as info:
        integrate_period(p, lv)
    assert info.value.trajectory.f_drift > 1e-9
    assert integrate_period(p, lv, strict=False).f_drift > 1e-9


def test_circle_from_degenerate_level():
    p = Params(-0.7)
    c = reconstruct_curve(p, energy_level(p, eta_rel=0.0), 1)
    r = np.hypot(c.points[:, 0], c.points[:, 1])
    assert np.allclose(r, 1 / k_plus(-0.7), rtol=1e-14)
    assert c.closed and c.embedded and c.rotation_index == 1
    assert np.max(np.abs(equation_residual(c))) <= 1e-10


def test_circle_is_symmetric_of_every_order():
    c = circle_curve(Params(0.0), 64)
    assert symmetry_mismatch(c, 7) <= 1e-11
    assert is_embedded(c)


def test_two_symmetric_embedded(two_symmetric):
    p, lv, c = two_symmetric
    assert c.closed and c.rotation_index == 1 and c.embedded
    assert c.closure_error <= 1e-6 * c.diameter
    assert c.symmetry_order == 2
    assert symmetry_mismatch(c, 2) <= 1e-6 * c.diameter
    assert symmetry_mismatch(c, 3) > 1e-3 * c.diameter
    assert np.max(np.abs(equation_residual(c))) <= 1e-6


def test_fewer_periods_do_not_close(two_symmetric):
    p, lv, _ = two_symmetric
    c = reconstruct_curve(p, lv, 1)
    assert not c.closed and c.rotation_index == 0
    with pytest.raises(DomainError):
        is_embedded(c)


def test_three_symmetric_embedded():
    p, lv = _closed_level(-3.0, 1, 3)
    c = reconstruct_curve(p, lv, 3)
    assert c.closed and c.embedded and c.symmetry_order == 3


def test_rotation_index_two_is_not_embedded():
    p, lv = _closed_level(0.19, 2, 3)
    c = reconstruct_curve(p, lv, 3)
    assert c.closed and c.rotation_index == 2
    assert not c.embedded and c.intersection is not None
    assert abs(c.total_turning - 4 * math.pi) <= 1e-6


@pytest.mark.parametrize("lam,n,m", [(-0.5, 1, 2), (0.19, 2, 3), (-5.0, 1, 4), (-3.0, 2, 5)])
def test_embedding_agrees_with_shapely(lam, n, m):
    p, lv = _closed_level(lam, n, m)
    c = reconstruct_curve(p, lv, m)
    assert c.embedded == LinearRing(c.points).is_simple


def test_normal_flip_gives_mirror_image():
    lam = 0.4
    lv = energy_level(Params(lam), eta_rel=2.0)
    c = reconstruct_curve(Params(lam), lv, 1)
    flipped = reconstruct_curve(Params(-lam), lv, 1, normal=-1)
    mirror = c.points * np.array([1.0, -1.0])
    assert np.max(np.abs(flipped.points - mirror)) <= 1e-8
    assert np.max(np.abs(equation_residual(flipped))) <= 1e-6


def test_self_intersection_helpers():
    t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    assert find_self_intersection(np.column_stack([np.cos(t), np.sin(t)])) is None
    eight = np.column_stack([np.sin(t), np.sin(t) * np.cos(t)])
    assert find_self_intersection(eight) is not None
    assert find_self_intersection([(0, 0), (1, 0), (1, 1)], closed=False) is None


def test_detect_symmetry_order_bounds():
    c = circle_curve(Params(0.0), 64)
    assert detect_symmetry_order(c, 5) == 0
    with pytest.raises(DomainError):
        symmetry_mismatch(c, 0)


def test_curve_csv_format(two_symmetric):
    _, _, c = two_symmetric
    buf = io.StringIO()
    write_curve_csv(c, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "s,x,y,k,tau,nu,theta"
    assert len(lines) == len(c.s) + 1
    row = [float(v) for v in lines[5].split(",")]
    assert row[1] == c.points[4, 0] and row[3] == c.k[4]


def test_reconstruction_is_deterministic():
    p = Params(-0.3)
    lv = energy_level(p, eta_rel=3.0)
    a = reconstruct_curve(p, lv, 2)
    b = reconstruct_curve(p, lv, 2)
    assert np.array_equal(a.points, b.points)
