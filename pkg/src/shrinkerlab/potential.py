"""Closed-form quantities attached to the model parameter lambda.

Everything here lives in the scaled convention ``k = -<x, N> + lambda``.
With ``u`` the curvature, the effective potential is

    V(u) = u**2 - 2*lambda*u - 2*log(u),

whose unique minimum sits at the positive root ``k_plus`` of
``k**2 - lambda*k - 1 = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

#: Smallest curvature value for which ``log`` is evaluated.
U_MIN = 1e-300


@dataclass(frozen=True)
class Params:
    """Model parameter plus solver tolerances.

    ``tol_root`` bounds the energy residual of level endpoints (relative to
    ``max(1, |eta|)``), ``tol_quad`` the relative quadrature error and
    ``tol_ode`` the absolute/relative local tolerance of the integrator.
    """

    lam: float
    tol_root: float = 1e-12
    tol_quad: float = 1e-10
    tol_ode: float = 1e-13

    def __post_init__(self):
        if not math.isfinite(self.lam):
            raise DomainError(f"lambda must be finite, got {self.lam!r}")
        for name in ("tol_root", "tol_quad", "tol_ode"):
            value = getattr(self, name)
            if not (0.0 < value <= 1e-4):
                raise DomainError(f"{name} must lie in (0, 1e-4], got {value!r}")

    def with_lambda(self, lam: float) -> "Params":
        return Params(lam, self.tol_root, self.tol_quad, self.tol_ode)


@dataclass(frozen=True)
class Equilibria:
    """Equilibria of the phase flow.

    ``k_plus``/``k_minus`` are the roots of ``k**2 - lam*k - 1``; ``nu_plus``
    and ``nu_minus`` solve the same quadratic in the (tau, nu) chart, so they
    carry the same numbers. Geometrically the labels swap: the curvature
    equilibrium ``(0, k_plus)`` is the point ``(0, nu_minus)`` of the
    (tau, nu) plane, i.e. the circle of radius ``-nu_minus = 1/k_plus``.
    """

    k_plus: float
    k_minus: float
    nu_plus: float
    nu_minus: float
    min_V: float


@dataclass(frozen=True)
class PotentialPoint:
    """``V`` and its first four derivatives at curvature ``u``."""

    u: float
    v: float
    v1: float
    v2: float
    v3: float
    v4: float


def k_plus(lam: float) -> float:
    """Positive root of ``k**2 - lam*k - 1``, free of cancellation."""
    disc = math.hypot(lam, 2.0)
    if lam >= 0:
        return 0.5 * (lam + disc)
    return 2.0 / (disc - lam)


def min_potential(lam: float) -> float:
    """``min V = 1 - lam*k_plus - 2*log(k_plus)``."""
    k = k_plus(lam)
    return 1.0 - lam * k - 2.0 * math.log(k)


def equilibria(p: Params) -> Equilibria:
    kp = k_plus(p.lam)
    km = -1.0 / kp
    return Equilibria(k_plus=kp, k_minus=km, nu_plus=kp, nu_minus=km,
                      min_V=min_potential(p.lam))


def potential(lam, u):
    """Vectorised ``V(u)``; no domain checks."""
    u = np.asarray(u, dtype=float)
    return u * u - 2.0 * lam * u - 2.0 * np.log(u)


def potential_at(p: Params, u: float) -> PotentialPoint:
    """Value and derivatives of ``V`` at ``u > 0``."""
    if not (u >= U_MIN) or not math.isfinite(u):
        raise DomainError(f"curvature value must be >= {U_MIN:g}, got {u!r}")
    lam = p.lam
    return PotentialPoint(
        u=u,
        v=u * u - 2.0 * lam * u - 2.0 * math.log(u),
        v1=2.0 * u - 2.0 * lam - 2.0 / u,
        v2=2.0 + 2.0 / (u * u),
        v3=-4.0 / u ** 3,
        v4=12.0 / u ** 4,
    )


def first_integral(p: Params, tau, nu):
    """``F(tau, nu) = (lam - nu) * exp(-(nu**2 + tau**2) / 2)``."""
    tau = np.asarray(tau, dtype=float)
    nu = np.asarray(nu, dtype=float)
    out = (p.lam - nu) * np.exp(-0.5 * (nu * nu + tau * tau))
    return out[()] if out.ndim == 0 else out


def sho_limit_angle(p: Params) -> float:
    """Limit of the turning angle as the energy drops to the well bottom.

    Equal to ``2*pi*k/sqrt(k**2 + 1)`` with ``k = k_plus``; the form below is
    the one with a direct dependence on lambda.
    """
    lam = p.lam
    return math.pi * math.sqrt(2.0) * math.sqrt(lam / math.hypot(lam, 2.0) + 1.0)


def chicone_criterion(p: Params) -> float:
    """``5 V'''^2 - 4 V'' V''''`` at the well bottom, ``-16 k^-6 - 96 k^-4``.

    See :func:`energy_slope_at_minimum` for the quantity that actually fixes
    the sign of ``d(delta_theta)/d(eta)`` near the bottom.
    """
    k = k_plus(p.lam)
    return -16.0 * k ** -6 - 96.0 * k ** -4


def energy_slope_at_minimum(p: Params) -> float:
    """First-order coefficient ``c`` in ``delta_theta = T0 + c*eta_rel + ...``.

    From the anharmonic expansion of the period of ``p**2 + V(u) = eta``:
    ``c = T0 * (5 V3**2 - 3 V2 V4) / (24 V2**3)`` with ``T0`` the small
    oscillation limit. Negative iff ``k_plus > 1/3``.
    """
    k = k_plus(p.lam)
    v2 = 2.0 + 2.0 / (k * k)
    v3 = -4.0 / k ** 3
    v4 = 12.0 / k ** 4
    return sho_limit_angle(p) * (5.0 * v3 * v3 - 3.0 * v2 * v4) / (24.0 * v2 ** 3)
