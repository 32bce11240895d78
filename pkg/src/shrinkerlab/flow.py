"""Phase-flow integration and planar curve reconstruction.

The curve is rebuilt from the Frenet system

    tau' = 1 + lam*k - k**2,   k' = k*tau,   theta' = k,
    x' = cos(theta),           y' = sin(theta),

with ``N`` the tangent rotated by +pi/2, so that ``tau = <x, T>`` and
``nu = <x, N> = lam - k``. Internally the curvature is carried as
``w = log k``: along high-energy orbits ``k`` drops to ``exp(-eta/2)`` and
only the logarithm keeps a relative accuracy the return trip can use.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq, minimize_scalar
from scipy.spatial import ConvexHull, QhullError

from .errors import ConservationError, DomainError, IntegrationError
from .potential import Params, k_plus
from .turning_angle import EnergyLevel

TOL_CLOSE = 1e-6
TOL_SYM = 1e-6
MAX_DRIFT = 1e-9
# bound on |tau - <x,T>| and |nu - <x,N>|; global error in x grows with the period
MAX_CONSISTENCY = 1e-10
MAX_STEPS = 10_000_000
TURNING_TOL = 1e-6
_W_CLAMP = 300.0


@dataclass(frozen=True)
class PhaseState:
    s: float
    tau: float
    k: float
    theta: float
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One period of the phase flow, sampled uniformly in arc length.

    Samples run from ``s = 0`` (``tau = 0``, ``k = u_plus``) to the next
    downward zero of ``tau`` inclusive.
    """

    lam: float
    s: np.ndarray
    tau: np.ndarray
    k: np.ndarray
    theta: np.ndarray
    x: np.ndarray
    y: np.ndarray
    period_s: float
    delta_theta_ode: float
    arc_length_ode: float
    f_drift: float
    consistency_residual: float
    k_min: float
    k_max: float
    steps: int
    end_state: tuple = field(repr=False, default=())

    @property
    def nu(self) -> np.ndarray:
        return self.lam - self.k

    def states(self) -> Iterator[PhaseState]:
        for row in zip(self.s, self.tau, self.k, self.theta, self.x, self.y):
            yield PhaseState(*map(float, row))


@dataclass(frozen=True, eq=False)
class PlanarCurve:
    """Reconstructed curve over ``periods`` phase periods.

    ``points`` holds one sample per grid node; for closed curves the last
    node is the start point revisited and is not repeated. ``symmetry_order``
    is 0 for the round circle (continuous symmetry) and 1 for open curves.
    """

    lam: float
    points: np.ndarray
    s: np.ndarray
    tau: np.ndarray
    k: np.ndarray
    theta: np.ndarray
    periods: int
    closure_error: float
    diameter: float
    total_turning: float
    closed: bool
    rotation_index: int
    symmetry_order: int
    embedded: bool
    intersection: tuple | None = None
    period_s: float = math.nan
    f_drift: float = 0.0
    degenerate: bool = False

    @property
    def nu(self) -> np.ndarray:
        return self.lam - self.k

    @property
    def length(self) -> float:
        return self.period_s * self.periods


def phase_rhs(p: Params, state: PhaseState) -> tuple[float, float, float, float, float]:
    """``(tau', k', theta', x', y')`` at ``state``; requires ``k > 0``."""
    k = state.k
    if not k > 0.0:
        raise DomainError(f"curvature must be positive, got {k!r}")
    return (1.0 + p.lam * k - k * k, k * state.tau, k,
            math.cos(state.theta), math.sin(state.theta))


def _log_rhs(lam, sign):
    def rhs(s, y):
        tau, w, theta = y[0], y[1], y[2]
        ew = math.exp(min(w, _W_CLAMP))
        k = sign * ew
        return np.array([1.0 + lam * k - ew * ew, tau, k,
                         math.cos(theta), math.sin(theta)])
    return rhs


class _Segments:
    """Piecewise dense output collected step by step."""

    def __init__(self):
        self.t0 = []
        self.t1 = []
        self.interp = []

    def add(self, t0, t1, interp):
        self.t0.append(t0)
        self.t1.append(t1)
        self.interp.append(interp)

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((5, t.size))
        idx = np.searchsorted(np.asarray(self.t1), t, side="left")
        idx = np.minimum(idx, len(self.t1) - 1)
        for j in np.unique(idx):
            sel = idx == j
            out[:, sel] = self.interp[j](t[sel])
        return out


def _one_period(lam, sign, y0, s0, tol, max_steps):
    """Integrate from a max-curvature state to the next one.

    Returns ``(s_end, y_end, segments, steps, k_min, k_max)``.
    """
    rhs = _log_rhs(lam, sign)
    solver = DOP853(rhs, s0, np.asarray(y0, dtype=float), np.inf,
                    rtol=tol, atol=tol)
    segs = _Segments()
    stage = 0  # 0: before the mid-period minimum, 1: after it
    steps = 0
    w_lo = w_hi = float(y0[1])
    probe = np.linspace(0.0, 1.0, 9)[1:-1]
    while True:
        t_old = solver.t
        tau_old = solver.y[0]
        msg = solver.step()
        steps += 1
        if solver.status == "failed":
            raise IntegrationError(f"integration failed at s={solver.t:.6g}: {msg}")
        if steps > max_steps:
            raise IntegrationError(f"more than {max_steps} steps in one period")
        interp = solver.dense_output()
        segs.add(t_old, solver.t, interp)
        ts = np.concatenate([[t_old], t_old + probe * (solver.t - t_old), [solver.t]])
        vals = interp(ts)
        taus = vals[0]
        taus[0] = tau_old
        taus[-1] = solver.y[0]
        w_lo = min(w_lo, float(np.min(vals[1])))
        w_hi = max(w_hi, float(np.max(vals[1])))
        for a, b, ta, tb in zip(taus[:-1], taus[1:], ts[:-1], ts[1:]):
            if stage == 0 and a < 0.0 <= b:
                stage = 1
                # k is smallest exactly where tau turns non-negative
                s_mid = tb if b == 0.0 else brentq(lambda t: interp(t)[0], ta, tb, xtol=1e-14,
                                                   rtol=4 * np.finfo(float).eps)
                w_lo = min(w_lo, float(interp(s_mid)[1]))
            elif stage == 1 and a > 0.0 >= b:
                if b == 0.0:
                    s_end = tb
                else:
                    s_end = brentq(lambda t: interp(t)[0], ta, tb,
                                   xtol=1e-14, rtol=4 * np.finfo(float).eps)
                y_end = interp(s_end)
                y_end[0] = 0.0 if b == 0.0 else y_end[0]
                return s_end, y_end, segs, steps, math.exp(w_lo), math.exp(w_hi)


def _sample_period(segs, s0, s_end, n):
    s = s0 + (s_end - s0) * np.arange(n) / n
    return s, segs(s)


def _log_f(lam, sign, tau, w):
    # log |F| with nu = lam - k, k = sign * e^w
    nu = lam - sign * np.exp(w)
    return w - 0.5 * (nu * nu + tau * tau)


def _drift(lam, sign, y, logf0):
    logf = _log_f(lam, sign, y[0], y[1])
    return float(np.max(np.abs(np.expm1(logf - logf0))))


def _consistency(lam, sign, y):
    tau, w, th, x, yy = y
    c, s = np.cos(th), np.sin(th)
    nu = lam - sign * np.exp(w)
    return float(max(np.max(np.abs(tau - (x * c + yy * s))),
                     np.max(np.abs(nu - (-x * s + yy * c)))))


def _start_state(lam, sign, level):
    u = level.u_plus
    return np.array([0.0, math.log(u), 0.0, 0.0, lam - sign * u])


def _check_level(p, level, sign):
    expect = p.lam if sign > 0 else -p.lam
    if level.lam != expect:
        raise DomainError("level lambda does not match the parameter / normal choice")
    if level.degenerate:
        raise DomainError("degenerate level: the orbit is the equilibrium circle")


def integrate_period(p: Params, level: EnergyLevel, samples: int = 512, *,
                     strict: bool = True) -> Trajectory:
    """Integrate one period of ``level`` and measure it.

    Parameters
    ----------
    samples : int
        Number of uniformly spaced samples per period (the endpoint is added).
    strict : bool
        Raise :class:`ConservationError` if the relative drift of the first
        integral exceeds ``1e-9`` (or :class:`IntegrationError` if ``tau`` and
        ``nu`` disagree with the position by more than ``1e-10``); otherwise
        record it only.
    """
    _check_level(p, level, +1)
    lam = p.lam
    y0 = _start_state(lam, 1, level)
    s_end, y_end, segs, steps, kmin, kmax = _one_period(lam, 1, y0, 0.0, p.tol_ode, MAX_STEPS)
    s, ys = _sample_period(segs, 0.0, s_end, samples)
    s = np.append(s, s_end)
    ys = np.column_stack([ys, y_end])
    logf0 = float(_log_f(lam, 1, 0.0, y0[1]))
    drift = _drift(lam, 1, ys, logf0)
    traj = Trajectory(
        lam=lam, s=s, tau=ys[0], k=np.exp(ys[1]), theta=ys[2], x=ys[3], y=ys[4],
        period_s=float(s_end), delta_theta_ode=float(y_end[2] - y0[2]),
        arc_length_ode=float(s_end), f_drift=drift,
        consistency_residual=_consistency(lam, 1, ys), k_min=kmin, k_max=kmax,
        steps=steps, end_state=tuple(map(float, y_end)),
    )
    if strict and drift > MAX_DRIFT:
        raise ConservationError(f"first-integral drift {drift:.3e} exceeds {MAX_DRIFT:g}", traj)
    if strict and traj.consistency_residual > MAX_CONSISTENCY:
        raise IntegrationError(
            f"support-function residual {traj.consistency_residual:.3e} exceeds {MAX_CONSISTENCY:g}")
    return traj


def circle_curve(p: Params, samples: int = 512) -> PlanarCurve:
    """The equilibrium solution: circle of radius ``1/k_plus`` about the origin."""
    k = k_plus(p.lam)
    theta = 2.0 * math.pi * np.arange(samples) / samples
    pts = np.column_stack([np.sin(theta) / k, -np.cos(theta) / k])
    return PlanarCurve(
        lam=p.lam, points=pts, s=theta / k, tau=np.zeros(samples),
        k=np.full(samples, k), theta=theta, periods=1, closure_error=0.0,
        diameter=2.0 / k, total_turning=2.0 * math.pi, closed=True,
        rotation_index=1, symmetry_order=0, embedded=True,
        period_s=2.0 * math.pi / k, degenerate=True,
    )


def curve_diameter(points: np.ndarray) -> float:
    pts = np.asarray(points, dtype=float)
    try:
        pts = pts[ConvexHull(pts).vertices]
    except (QhullError, ValueError):
        pass
    d = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", d, d))))


def reconstruct_curve(p: Params, level: EnergyLevel, periods: int, *,
                      samples_per_period: int = 512, normal: int = 1,
                      strict: bool = True, max_symmetry: int | None = None) -> PlanarCurve:
    """Concatenate ``periods`` phase periods into a planar curve and classify it.

    ``normal=-1`` integrates the opposite-normal system: ``k < 0`` with
    parameter ``p.lam``, whose ``|k|`` dynamics are those of ``-p.lam``; the
    level must then belong to ``-p.lam``. The result is the mirror image of
    the ``-p.lam`` curve in the x-axis.
    """
    if periods < 1:
        raise DomainError(f"periods must be >= 1, got {periods!r}")
    if normal not in (1, -1):
        raise DomainError("normal must be +1 or -1")
    if level.degenerate and normal == 1:
        if level.lam != p.lam:
            raise DomainError("level was computed for a different lambda")
        return circle_curve(p, samples_per_period)
    _check_level(p, level, normal)
    lam, sign = p.lam, normal
    y = _start_state(lam, sign, level)
    y_first = y.copy()
    logf0 = _log_f(lam, sign, y[0], y[1])
    s0 = 0.0
    chunks = []
    period_lengths = []
    for _ in range(periods):
        s_end, y_end, segs, _, _, _ = _one_period(lam, sign, y, s0, p.tol_ode, MAX_STEPS)
        s, ys = _sample_period(segs, s0, s_end, samples_per_period)
        chunks.append((s, ys))
        period_lengths.append(s_end - s0)
        s0 = s_end
        y = np.array(y_end, dtype=float)
    s_all = np.concatenate([c[0] for c in chunks])
    ys_all = np.concatenate([c[1] for c in chunks], axis=1)
    drift = max(_drift(lam, sign, ys_all, logf0), _drift(lam, sign, y[:, None], logf0))
    if strict and drift > MAX_DRIFT * periods:
        raise ConservationError(f"first-integral drift {drift:.3e} over {periods} periods")

    pts = np.column_stack([ys_all[3], ys_all[4]])
    end = np.array([y[3], y[4]])
    closure = float(np.hypot(*(end - pts[0])))
    diameter = curve_diameter(pts)
    turning = float(y[2] - y_first[2])
    rot = int(round(turning / (2.0 * math.pi)))
    closed = (closure <= TOL_CLOSE * diameter
              and abs(turning - 2.0 * math.pi * rot) <= TURNING_TOL)
    curve = PlanarCurve(
        lam=lam, points=pts, s=s_all, tau=ys_all[0], k=sign * np.exp(ys_all[1]),
        theta=ys_all[2], periods=periods, closure_error=closure, diameter=diameter,
        total_turning=turning, closed=closed, rotation_index=rot if closed else 0,
        symmetry_order=1, embedded=False,
        period_s=float(np.mean(period_lengths)), f_drift=drift,
    )
    if not closed:
        return curve
    witness = find_self_intersection(pts, closed=True)
    order = detect_symmetry_order(curve, max_symmetry or 2 * periods)
    return replace(curve, embedded=witness is None, intersection=witness,
                    symmetry_order=order)


# --------------------------------------------------------------------------
# geometry tests

def find_self_intersection(points, closed: bool = True):
    """First pair ``(i, j)`` of non-adjacent polyline segments that meet.

    Segment ``i`` joins ``points[i]`` and ``points[i+1]`` (cyclically when
    ``closed``). Touching and collinear overlap count as intersections.
    Returns ``None`` for a simple polyline.
    """
    p = np.asarray(points, dtype=float)
    n = len(p)
    if closed:
        a, b = p, np.roll(p, -1, axis=0)
    else:
        a, b = p[:-1], p[1:]
    nseg = len(a)
    xmin = np.minimum(a[:, 0], b[:, 0])
    xmax = np.maximum(a[:, 0], b[:, 0])
    ymin = np.minimum(a[:, 1], b[:, 1])
    ymax = np.maximum(a[:, 1], b[:, 1])
    order = np.argsort(xmin, kind="stable")
    xmin_sorted = xmin[order]
    for pos, i in enumerate(order):
        stop = np.searchsorted(xmin_sorted, xmax[i], side="right")
        cand = order[pos + 1:stop]
        if cand.size == 0:
            continue
        cand = cand[(ymin[cand] <= ymax[i]) & (ymax[cand] >= ymin[i])]
        gap = np.abs(cand - i)
        if closed:
            gap = np.minimum(gap, nseg - gap)
        cand = cand[gap > 1]
        if cand.size == 0:
            continue
        hit = _segments_meet(a[i], b[i], a[cand], b[cand])
        if np.any(hit):
            j = int(cand[np.argmax(hit)])
            return (int(min(i, j)), int(max(i, j)))
    return None


def _orient(p, q, r):
    return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - \
           (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])


def _segments_meet(p1, p2, q1, q2):
    o1 = _orient(p1, p2, q1)
    o2 = _orient(p1, p2, q2)
    o3 = _orient(q1, q2, p1)
    o4 = _orient(q1, q2, p2)
    # bounding boxes already overlap, which settles the collinear cases
    return (o1 * o2 <= 0.0) & (o3 * o4 <= 0.0)


def is_embedded(curve: PlanarCurve) -> bool:
    """True iff no two non-adjacent segments of the closed polyline meet."""
    if not curve.closed:
        raise DomainError("embeddedness is only defined for closed curves")
    return find_self_intersection(curve.points, closed=True) is None


def _fourier(curve):
    z = curve.points[:, 0] + 1j * curve.points[:, 1]
    n = z.size
    c = np.fft.fft(z)
    freq = np.fft.fftfreq(n) * n  # integer wave numbers
    if n % 2 == 0:
        freq[n // 2] = 0.0  # Nyquist mode carries no shift information
    return z, c, freq


def _shifted(c, freq, frac):
    """Samples of the trigonometric interpolant shifted by ``frac`` of the period."""
    return np.fft.ifft(c * np.exp(2j * np.pi * freq * frac))


def symmetry_mismatch(curve: PlanarCurve, m: int) -> float:
    """Distance between the curve and its rotation by ``2*pi/m`` about the origin.

    The rotated samples are compared with the curve resampled at a common
    arc-length offset (trigonometric interpolation of the uniformly sampled
    closed curve); the result is the max pointwise distance, minimised over
    the offset.
    """
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m!r}")
    if not curve.closed:
        raise DomainError("symmetry is only defined for closed curves")
    z, c, freq = _fourier(curve)
    n = z.size
    rz = z * np.exp(2j * np.pi / m)
    # coarse offset: least squares over integer shifts via cross-correlation
    corr = np.fft.ifft(np.conj(np.fft.fft(rz)) * c)
    q0 = int(np.argmax(corr.real))

    def cost(frac):
        return float(np.max(np.abs(rz - _shifted(c, freq, frac))))

    def l2(frac):
        d = rz - _shifted(c, freq, frac)
        return float(np.vdot(d, d).real)

    lo, hi = (q0 - 1) / n, (q0 + 1) / n
    res = minimize_scalar(l2, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-14})
    return min(cost(res.x), cost(q0 / n))


def detect_symmetry_order(curve: PlanarCurve, max_order: int, tol: float = TOL_SYM) -> int:
    """Largest ``m <= max_order`` for which the curve is ``m``-symmetric."""
    if not curve.closed:
        return 1
    if curve.degenerate:
        return 0
    limit = tol * curve.diameter
    for m in range(max_order, 1, -1):
        if symmetry_mismatch(curve, m) <= limit:
            return m
    return 1


def equation_residual(curve: PlanarCurve) -> np.ndarray:
    """Pointwise ``k + <x, N> - lam`` with ``N`` the tangent rotated by +pi/2."""
    x, y = curve.points[:, 0], curve.points[:, 1]
    nu = -x * np.sin(curve.theta) + y * np.cos(curve.theta)
    return curve.k + nu - curve.lam


def write_curve_csv(curve: PlanarCurve, fh) -> None:
    """CSV with header ``s,x,y,k,tau,nu,theta`` (17 significant digits)."""
    fh.write("s,x,y,k,tau,nu,theta\n")
    cols = (curve.s, curve.points[:, 0], curve.points[:, 1], curve.k,
            curve.tau, curve.nu, curve.theta)
    for row in zip(*cols):
        fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
