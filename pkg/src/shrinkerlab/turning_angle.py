"""Energy levels of the curvature oscillator and their period integrals.

An orbit of the (tau, k) flow is labelled by its energy
``eta = tau**2 + V(k)``. Over one period the tangent turns by

    delta_theta = integral_{u-}^{u+} 2 du / sqrt(eta - V(u))

and the curve has length ``integral 2 du / (u sqrt(eta - V(u)))``. The
integrals are split at ``k_plus``; the right half is integrated in ``u``
and the left half in ``w = log u`` because ``u-`` decays like
``exp(-eta/2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BelowMinimumError, DomainError, InvariantViolation, NumericalError
from .potential import Params, k_plus, min_potential, sho_limit_angle
from .quadrature import tanh_sinh

#: Below this relative energy the SHO limit is returned instead of quadrature.
NEAR_DEGENERATE = 1e-10
_MAX_DOUBLINGS = 2000


@dataclass(frozen=True)
class EnergyLevel:
    """One periodic orbit: ``V(u_minus) = V(u_plus) = eta``.

    ``log_u_minus`` is authoritative; ``u_minus`` is its exponential and
    underflows to zero once ``eta`` exceeds roughly 1400.
    """

    lam: float
    eta: float
    eta_rel: float
    u_minus: float
    u_plus: float
    log_u_minus: float

    @property
    def k_plus(self) -> float:
        return k_plus(self.lam)

    @property
    def degenerate(self) -> bool:
        return self.eta_rel == 0.0

    def residuals(self) -> tuple[float, float]:
        """``(V(u_minus) - eta, V(u_plus) - eta)``, the first in log form."""
        w = self.log_u_minus
        ew = math.exp(w)
        v_minus = ew * ew - 2.0 * self.lam * ew - 2.0 * w
        u = self.u_plus
        v_plus = u * u - 2.0 * self.lam * u - 2.0 * math.log(u)
        return v_minus - self.eta, v_plus - self.eta


@dataclass(frozen=True)
class AngleResult:
    delta_theta: float
    arc_length: float
    quad_error_estimate: float
    degenerate: bool = False


def _x_minus_log1p(x):
    """``x - log1p(x)`` without cancellation near zero."""
    if abs(x) < 0.1:
        # alternating series x^2/2 - x^3/3 + ...
        term, acc = x, 0.0
        for j in range(2, 20):
            term *= -x
            acc += -term / j
        return acc
    return x - math.log1p(x)


def _expm1_minus(t):
    """``expm1(t) - t`` without cancellation near zero."""
    if abs(t) < 0.1:
        term, acc = t, 0.0
        for j in range(2, 20):
            term *= t / j
            acc += term
        return acc
    return math.expm1(t) - t


def _rise_right(k, x):
    """``V(k(1+x)) - V(k)`` for ``x > -1``; both terms are nonnegative."""
    return (k * x) ** 2 + 2.0 * _x_minus_log1p(x)


def _rise_left(k, t):
    """``V(k e^t) - V(k)``; uses ``log(u/k) = t`` exactly."""
    e = math.expm1(t)
    return (k * e) ** 2 + 2.0 * _expm1_minus(t)


def _solve_monotone(g, dg, a, b, target_tol):
    """Bracketed root of increasing/decreasing ``g`` on ``[a, b]`` plus Newton polish."""
    x = brentq(g, a, b, xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=500)
    r = g(x)
    for _ in range(3):
        d = dg(x)
        if d == 0.0 or not math.isfinite(d):
            break
        xn = x - r / d
        if not (min(a, b) <= xn <= max(a, b)):
            break
        rn = g(xn)
        if abs(rn) >= abs(r):
            break
        x, r = xn, rn
    if abs(r) > target_tol:
        raise NumericalError(f"root residual {r:.3e} exceeds {target_tol:.3e}")
    return x


def energy_level(p: Params, eta: float | None = None, *,
                 eta_rel: float | None = None) -> EnergyLevel:
    """Turning points of the orbit with energy ``eta`` (or ``min V + eta_rel``).

    Exactly one of ``eta`` / ``eta_rel`` must be given. Energies within a few
    ulps below the minimum are snapped to the degenerate level.
    """
    if (eta is None) == (eta_rel is None):
        raise DomainError("give exactly one of eta / eta_rel")
    lam = p.lam
    k = k_plus(lam)
    vmin = min_potential(lam)
    if eta_rel is None:
        if not math.isfinite(eta):
            raise DomainError(f"eta must be finite, got {eta!r}")
        eta_rel = eta - vmin
        if eta_rel < 0.0:
            if -eta_rel <= 8.0 * np.finfo(float).eps * max(1.0, abs(eta)):
                eta_rel = 0.0
            else:
                raise BelowMinimumError(f"eta={eta!r} is below min V={vmin!r}")
    else:
        if not math.isfinite(eta_rel):
            raise DomainError(f"eta_rel must be finite, got {eta_rel!r}")
        if eta_rel < 0.0:
            raise BelowMinimumError(f"eta_rel={eta_rel!r} is negative")
        eta = vmin + eta_rel
    if eta_rel == 0.0:
        return EnergyLevel(lam, eta, 0.0, k, k, math.log(k))

    tol = p.tol_root * max(1.0, abs(eta))
    # the relative-energy forms are accurate to ~ulp(eta_rel); never ask for more
    tol = max(tol, 16.0 * np.finfo(float).eps * eta_rel)

    # right turning point, u = k(1+x)
    g_r = lambda x: _rise_right(k, x) - eta_rel
    dg_r = lambda x: 2.0 * k * k * x + 2.0 * x / (1.0 + x)
    hi = 1.0
    for _ in range(_MAX_DOUBLINGS):
        if g_r(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise NumericalError("right turning point not bracketed")
    x_plus = _solve_monotone(g_r, dg_r, 0.0, hi, tol)

    # left turning point, u = k e^t
    g_l = lambda t: _rise_left(k, t) - eta_rel
    dg_l = lambda t: 2.0 * math.expm1(t) * (k * k * math.exp(t) + 1.0)
    lo = -1.0
    for _ in range(_MAX_DOUBLINGS):
        if g_l(lo) > 0.0:
            break
        lo *= 2.0
    else:
        raise NumericalError("left turning point not bracketed")
    t_minus = _solve_monotone(g_l, dg_l, lo, 0.0, tol)

    log_um = math.log(k) + t_minus
    return EnergyLevel(lam, eta, eta_rel, math.exp(log_um), k * (1.0 + x_plus), log_um)


def _right_integrand(lam, k, a):
    def f(dl, dr):
        # V(a) - V(a - dr)
        gap = dr * (2.0 * a - dr - 2.0 * lam) + 2.0 * np.log1p(-dr / a)
        gap = np.maximum(gap, np.finfo(float).tiny)
        root = np.sqrt(gap)
        u = np.where(dl < dr, k + dl, a - dr)
        return np.vstack([2.0 / root, 2.0 / (u * root)])
    return f


def _left_integrand(lam, wk, wm):
    def f(dl, dr):
        w = np.where(dl < dr, wm + dl, wk - dr)
        ew = np.exp(w)
        # V(e^wm) - V(e^w)
        gap = (2.0 * dl + 2.0 * lam * ew * -np.expm1(-dl)
               - ew * ew * -np.expm1(-2.0 * dl))
        gap = np.maximum(gap, np.finfo(float).tiny)
        root = np.sqrt(gap)
        return np.vstack([2.0 * ew / root, 2.0 / root])
    return f


def delta_theta(p: Params, level: EnergyLevel) -> AngleResult:
    """Turning angle and arc length of one period of ``level``.

    Levels with ``eta_rel < NEAR_DEGENERATE`` (including the equilibrium)
    return the small-oscillation limit with ``degenerate=True``.
    """
    if level.lam != p.lam:
        raise DomainError("level was computed for a different lambda")
    k = k_plus(p.lam)
    if level.eta_rel < NEAR_DEGENERATE:
        sho = sho_limit_angle(p)
        return AngleResult(sho, sho / k, 0.0, degenerate=True)

    rtol = p.tol_quad
    right = tanh_sinh(_right_integrand(p.lam, k, level.u_plus), level.u_plus - k, rtol)
    wk = math.log(k)
    left = tanh_sinh(_left_integrand(p.lam, wk, level.log_u_minus),
                     wk - level.log_u_minus, rtol)
    dtheta, arc = right.value + left.value
    err = max(right.error, left.error)
    if err > rtol:
        raise NumericalError(f"quadrature did not converge (estimate {err:.2e})")
    if not (0.0 < dtheta < 2.0 * math.pi) or not arc > 0.0:
        raise InvariantViolation(f"delta_theta={dtheta!r}, arc={arc!r} out of range")
    return AngleResult(float(dtheta), float(arc), err)


def delta_theta_rel(p: Params, eta_rel: float) -> AngleResult:
    """:func:`delta_theta` at ``eta = min V + eta_rel``, ``eta_rel > 0``."""
    if not eta_rel > 0.0:
        raise DomainError(f"eta_rel must be positive, got {eta_rel!r}")
    return delta_theta(p, energy_level(p, eta_rel=eta_rel))
