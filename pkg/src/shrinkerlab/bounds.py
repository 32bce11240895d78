"""Closed-form bounds on the turning angle and their large-energy behaviour.

For large ``eta`` the turning angle tends to ``pi`` with

    delta_theta - pi ~ 2*lam / sqrt(eta),

which the bounds below bracket: an exact arcsin lower bound valid at every
level, and a leading-order upper bound with a free cut parameter ``L > 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, InvariantViolation
from .potential import Params, min_potential
from .turning_angle import EnergyLevel, delta_theta, energy_level

DEFAULT_L = 4.0
_ARCSIN_SLACK = 1e-12


def _require_match(p: Params, level: EnergyLevel) -> None:
    if level.lam != p.lam:
        raise DomainError("level was computed for a different lambda")


def _arcsin_argument(level: EnergyLevel) -> float:
    if level.degenerate:
        raise DomainError("the arcsin bound needs a non-degenerate level")
    lam = level.lam
    # sqrt(eta + 2 log u+ + lam^2) == u+ - lam, since V(u+) = eta
    a = (lam - level.u_minus) / (level.u_plus - lam)
    if abs(a) > 1.0 + _ARCSIN_SLACK:
        raise InvariantViolation(f"arcsin argument {a!r} outside [-1, 1]; root finding is off")
    return min(1.0, max(-1.0, a))


def lower_bound(p: Params, level: EnergyLevel) -> float:
    """Exact lower bound ``pi + 2*arcsin((lam - u-) / sqrt(eta + 2 log u+ + lam^2))``.

    Each half-period (``u- -> u+`` and back) turns by at least
    ``pi/2 + arcsin(...)``, hence the factor two. The bound is sharp to
    leading order as ``eta -> inf``.
    """
    _require_match(p, level)
    return math.pi + 2.0 * math.asin(_arcsin_argument(level))


def published_lower_bound(p: Params, level: EnergyLevel) -> float:
    """The single-arcsin variant ``pi + arcsin(...)``.

    Kept for comparison only: it is not a valid bound (for ``lam = -5`` it
    exceeds the true angle at every energy), see :func:`lower_bound`.
    """
    _require_match(p, level)
    return math.pi + math.asin(_arcsin_argument(level))


def upper_bound_leading(p: Params, eta: float, L: float = DEFAULT_L) -> float:
    """Leading part ``pi + 2*(lam - 1 + sqrt(L/(L-1))) / sqrt(eta)`` of the upper bound.

    The true bound carries an unquantified ``o(1/sqrt(eta))`` remainder, so
    this is only meaningful as ``eta -> inf``.
    """
    if not L > 1.0:
        raise DomainError(f"L must exceed 1, got {L!r}")
    if not eta > 0.0:
        raise DomainError(f"eta must be positive, got {eta!r}")
    return math.pi + 2.0 * (p.lam - 1.0 + math.sqrt(L / (L - 1.0))) / math.sqrt(eta)


def upper_cut_point(lam: float, eta: float, L: float = DEFAULT_L) -> float:
    """Cut point ``exp(-eta/(2L) + 1/2 + |lam|)`` splitting the upper-bound integral."""
    return math.exp(-eta / (2.0 * L) + 0.5 + abs(lam))


def u_bar_plus(lam: float, eta: float) -> float:
    """Positive root of ``u^2 - 2*lam*u = eta`` (the turning point without the log term)."""
    r = math.sqrt(lam * lam + eta)
    return lam + r if lam >= 0.0 else eta / (r - lam)


@dataclass(frozen=True)
class BoundReport:
    lam: float
    eta: float
    L: float
    lower: float
    published_lower: float
    upper_leading: float
    u_bar_plus: float
    u_plus: float
    delta_theta_measured: float

    @property
    def lower_holds(self) -> bool:
        return self.lower <= self.delta_theta_measured + 1e-9

    @property
    def scaled_upper_gap(self) -> float:
        """``(measured - upper_leading) * sqrt(eta)``; should tend to a value <= 0."""
        return (self.delta_theta_measured - self.upper_leading) * math.sqrt(self.eta)


def bound_report(p: Params, eta: float | None = None, L: float = DEFAULT_L, *,
                 eta_rel: float | None = None) -> BoundReport:
    level = energy_level(p, eta, eta_rel=eta_rel)
    measured = delta_theta(p, level).delta_theta
    ub = u_bar_plus(p.lam, level.eta)
    # u_bar < u+ exactly when log u_bar > 0; below that the ordering flips
    if ub > 1.0 and not ub < level.u_plus:
        raise InvariantViolation(f"u_bar_plus={ub!r} not below u_plus={level.u_plus!r}")
    return BoundReport(
        lam=p.lam, eta=level.eta, L=L, lower=lower_bound(p, level),
        published_lower=published_lower_bound(p, level),
        upper_leading=upper_bound_leading(p, level.eta, L),
        u_bar_plus=ub, u_plus=level.u_plus, delta_theta_measured=measured,
    )


@dataclass(frozen=True)
class CorollaryResult:
    lam: float
    eta_threshold: float
    checked_up_to: float
    max_delta_theta: float
    min_delta_theta: float


def check_negative_lambda_corollary(p: Params, eta_cap: float = 1e10,
                                    span: float = 1e4) -> CorollaryResult:
    """Find an energy beyond which ``delta_theta < pi`` for ``lam < 0``.

    Relative energies are doubled from 1 until the angle drops below ``pi``;
    the candidate is then confirmed on doublings up to ``span`` times the
    threshold energy. A violation restarts the search past it.

    Raises
    ------
    DomainError
        If ``lam >= 0``.
    InvariantViolation
        If no threshold below ``eta_cap`` survives the confirmation sweep.
    """
    if p.lam >= 0.0:
        raise DomainError("the corollary concerns lam < 0")
    vmin = min_potential(p.lam)
    angle = lambda e: delta_theta(p, energy_level(p, eta_rel=e)).delta_theta
    e = 1.0
    while vmin + e <= eta_cap:
        if angle(e) < math.pi:
            vals = []
            probe = e
            while vmin + probe <= span * (vmin + e):
                probe *= 2.0
                vals.append(angle(probe))
                if vals[-1] >= math.pi:
                    break
            else:
                return CorollaryResult(p.lam, vmin + e, vmin + probe,
                                       max(vals), min(vals))
            e = probe
        e *= 2.0
    raise InvariantViolation(f"no threshold with delta_theta < pi below eta={eta_cap:g}")
