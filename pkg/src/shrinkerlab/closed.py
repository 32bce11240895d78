"""Search for closed solutions and theorem sweeps over lambda.

A periodic orbit closes up in the plane when its turning angle is a
rational multiple ``2*pi*n/m`` of a full turn (``gcd(n, m) = 1``); the
curve then closes after ``m`` phase periods with rotation index ``n``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError, DomainError, NumericalError, ShrinkerError
from .flow import PlanarCurve, reconstruct_curve, symmetry_mismatch, TOL_SYM
from .potential import Params, min_potential, sho_limit_angle
from .turning_angle import delta_theta, energy_level

log = logging.getLogger(__name__)

ANGLE_TOL = 1e-9
PROFILE_RANGE = (1e-8, 1e8)
PROFILE_POINTS = 200
THM12_LOWER = -2.0 / math.sqrt(3.0)
THM13_UPPER = -7.0 / (2.0 * math.sqrt(2.0))


@dataclass(frozen=True, eq=False)
class ClosedSolution:
    lam: float
    eta_star: float
    eta_rel: float
    n: int
    m: int
    delta_theta: float
    rotation_index: int
    symmetry_order: int
    embedded: bool
    closure_error: float
    curve: PlanarCurve

    @property
    def target(self) -> float:
        return 2.0 * math.pi * self.n / self.m

    def as_record(self, curve_file: str | None = None) -> dict:
        return {
            "lambda": self.lam, "eta_star": self.eta_star, "n": self.n, "m": self.m,
            "delta_theta": self.delta_theta, "embedded": self.embedded,
            "symmetry_order": self.symmetry_order, "closure_error": self.closure_error,
            "curve_file": curve_file,
        }


@dataclass(frozen=True, eq=False)
class ThetaProfile:
    """Turning angle sampled on a geometric grid of relative energies.

    ``monotone_flags[i]`` is the sign of ``delta_theta[i+1] - delta_theta[i]``.
    """

    lam: float
    eta_rel: np.ndarray
    eta: np.ndarray
    delta_theta: np.ndarray

    @property
    def observed_min(self) -> float:
        return float(np.min(self.delta_theta))

    @property
    def observed_max(self) -> float:
        return float(np.max(self.delta_theta))

    @property
    def monotone_flags(self) -> np.ndarray:
        return np.sign(np.diff(self.delta_theta)).astype(int)

    def crossings(self, target: float) -> list[tuple[float, float]]:
        """Relative-energy brackets around every grid crossing of ``target``."""
        d = self.delta_theta - target
        out = []
        for i in range(d.size - 1):
            if d[i] == 0.0 or d[i] * d[i + 1] < 0.0:
                out.append((float(self.eta_rel[i]), float(self.eta_rel[i + 1])))
        return out


def theta_profile(p: Params, eta_rel_min: float = PROFILE_RANGE[0],
                  eta_rel_max: float = PROFILE_RANGE[1],
                  points: int = PROFILE_POINTS) -> ThetaProfile:
    if not (0.0 < eta_rel_min < eta_rel_max) or points < 2:
        raise DomainError("need 0 < eta_rel_min < eta_rel_max and points >= 2")
    grid = np.geomspace(eta_rel_min, eta_rel_max, points)
    vals = np.array([delta_theta(p, energy_level(p, eta_rel=e)).delta_theta for e in grid])
    return ThetaProfile(p.lam, grid, min_potential(p.lam) + grid, vals)


def _angle_rel(p, eta_rel):
    return delta_theta(p, energy_level(p, eta_rel=eta_rel)).delta_theta


def solve_eta_rel_for_angle(p: Params, target: float, bracket: tuple[float, float]) -> float:
    """Relative energy with ``delta_theta = target`` inside ``bracket``.

    The bracket is subdivided geometrically first, so if the angle crosses
    the target several times the crossing nearest ``bracket[0]`` is returned.
    """
    lo, hi = sorted(bracket)
    if not lo > 0.0:
        raise DomainError("relative-energy bracket must be positive")
    f = lambda e: _angle_rel(p, e) - target
    grid = np.geomspace(lo, hi, 17)
    vals = [f(e) for e in grid]
    if bracket[0] > bracket[1]:
        grid, vals = grid[::-1], vals[::-1]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            return float(a)
        if fa * fb < 0.0:
            break
    else:
        if vals[-1] == 0.0:
            return float(grid[-1])
        raise BracketError(f"delta_theta does not cross {target!r} on [{lo:.3g}, {hi:.3g}]")
    g = lambda r: f(math.exp(r))
    r = brentq(g, math.log(a), math.log(b), xtol=1e-15, rtol=4 * np.finfo(float).eps,
               maxiter=200)
    e = math.exp(r)
    resid = f(e)
    if abs(resid) > ANGLE_TOL:
        raise NumericalError(f"|delta_theta - target| = {abs(resid):.2e} at eta_rel={e:.6g}")
    return e


def solve_eta_for_angle(p: Params, target: float, bracket: tuple[float, float]) -> float:
    """Energy ``eta`` with ``delta_theta(eta) = target``, ``bracket`` in absolute energy."""
    vmin = min_potential(p.lam)
    rel = tuple(b - vmin for b in bracket)
    if min(rel) <= 0.0:
        raise DomainError("bracket must lie above min V")
    return vmin + solve_eta_rel_for_angle(p, target, rel)


def closed_solution(p: Params, n: int, m: int, eta_rel: float,
                    samples_per_period: int = 512) -> ClosedSolution:
    """Reconstruct and classify the orbit at ``eta_rel`` over ``m`` periods."""
    level = energy_level(p, eta_rel=eta_rel)
    angle = delta_theta(p, level).delta_theta
    curve = reconstruct_curve(p, level, m, samples_per_period=samples_per_period)
    return ClosedSolution(
        lam=p.lam, eta_star=level.eta, eta_rel=eta_rel, n=n, m=m, delta_theta=angle,
        rotation_index=curve.rotation_index, symmetry_order=curve.symmetry_order,
        embedded=curve.embedded, closure_error=curve.closure_error, curve=curve,
    )


def find_closed(p: Params, n: int, m: int, profile: ThetaProfile | None = None,
                samples_per_period: int = 512) -> list[ClosedSolution]:
    """All closed solutions with ``delta_theta = 2*pi*n/m`` visible on the profile."""
    if n < 1 or m < 1:
        raise DomainError("n and m must be positive")
    frac = Fraction(n, m)
    n, m = frac.numerator, frac.denominator
    profile = profile or theta_profile(p)
    target = 2.0 * math.pi * n / m
    out = []
    for br in profile.crossings(target):
        e = solve_eta_rel_for_angle(p, target, br)
        out.append(closed_solution(p, n, m, e, samples_per_period))
    return out


def enumerate_closed(p: Params, m_max: int = 12, n_max: int = 7,
                     profile: ThetaProfile | None = None,
                     failures: list | None = None) -> list[ClosedSolution]:
    """Closed solutions for every coprime ``(n, m)`` inside the observed range.

    Per-item errors are logged and appended to ``failures`` (if given) as
    ``(n, m, exception)``; the enumeration carries on.
    """
    if m_max < 1 or n_max < 1:
        raise DomainError("m_max and n_max must be >= 1")
    profile = profile or theta_profile(p)
    lo, hi = profile.observed_min, profile.observed_max
    found = []
    for m in range(1, m_max + 1):
        for n in range(1, n_max + 1):
            if math.gcd(n, m) != 1:
                continue
            target = 2.0 * math.pi * n / m
            if not (lo <= target <= hi):
                continue
            try:
                found.extend(find_closed(p, n, m, profile))
            except ShrinkerError as exc:
                log.warning("lambda=%g n/m=%d/%d failed: %s", p.lam, n, m, exc)
                if failures is not None:
                    failures.append((n, m, exc))
    found.sort(key=lambda s: (s.m, s.n, s.eta_rel))
    return found


def regime(lam: float) -> str:
    if lam >= 0.0:
        return "no-embedded"
    if lam > THM12_LOWER:
        return "embedded-2-symmetric"
    if lam < THM13_UPPER:
        return "embedded-m-symmetric"
    return "probe"


def _check_symmetric(sol: ClosedSolution, m: int) -> bool:
    curve = sol.curve
    return curve.closed and symmetry_mismatch(curve, m) <= TOL_SYM * curve.diameter


def _summary(sol: ClosedSolution) -> dict:
    return {"n": sol.n, "m": sol.m, "eta_star": sol.eta_star, "eta_rel": sol.eta_rel,
            "delta_theta": sol.delta_theta, "embedded": sol.embedded,
            "symmetry_order": sol.symmetry_order, "closure_error": sol.closure_error}


def validate_lambda(p: Params, m_max: int = 12, n_max: int = 7) -> dict:
    """Check one lambda against the theorem that covers it."""
    lam = p.lam
    kind = regime(lam)
    entry = {"lambda": lam, "regime": kind, "sho_limit": sho_limit_angle(p)}
    try:
        if kind == "no-embedded":
            prof = theta_profile(p, 1e-6, 1e6, PROFILE_POINTS)
            sols = enumerate_closed(p, m_max, n_max, profile=theta_profile(p))
            emb = [s for s in sols if s.embedded]
            entry.update(min_delta_theta=prof.observed_min, closed_found=len(sols),
                         embedded=[_summary(s) for s in emb])
            entry["pass"] = prof.observed_min > math.pi + 1e-6 and not emb
        elif kind == "embedded-2-symmetric":
            sols = find_closed(p, 1, 2)
            good = [s for s in sols if s.embedded and _check_symmetric(s, 2)]
            entry.update(solutions=[_summary(s) for s in sols])
            entry["pass"] = bool(good)
        else:
            prof = theta_profile(p)
            hits = []
            for m in range(3, m_max + 1):
                if not prof.observed_min <= 2.0 * math.pi / m <= prof.observed_max:
                    continue
                sols = find_closed(p, 1, m, prof)
                hits.extend(s for s in sols if s.embedded and _check_symmetric(s, s.m))
                if hits and kind == "embedded-m-symmetric":
                    break
            entry.update(solutions=[_summary(s) for s in hits])
            entry["pass"] = bool(hits) if kind == "embedded-m-symmetric" else None
    except ShrinkerError as exc:
        entry.update(error=str(exc), **{"pass": False})
    return entry


def validate_theorems(lams, params: Params | None = None, m_max: int = 12,
                      n_max: int = 7) -> dict:
    """Machine-readable report: one entry per lambda, plus an overall verdict.

    Entries in the probe window ``[-7/(2*sqrt 2), -2/sqrt 3]`` report what was
    found with ``pass = None``; they never fail the report.
    """
    base = params or Params(0.0)
    entries = [validate_lambda(base.with_lambda(float(lam)), m_max, n_max) for lam in lams]
    ok = all(e["pass"] is not False for e in entries)
    return {"entries": entries, "pass": ok}
