"""Double-exponential (tanh-sinh) quadrature on a finite interval.

The integrand receives the distances of each node from *both* endpoints
rather than the node itself. Near an endpoint the distance is produced
directly from the transformation, so integrands with algebraic endpoint
singularities can be written in a cancellation-free form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Nodes with |t| <= T_MAX; at T_MAX = 4.5 the node sits exp(-140) from the end,
# far past what an inverse square root singularity can contribute.
T_MAX = 4.5


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray
    error: float
    levels: int
    evaluations: int


@lru_cache(maxsize=None)
def _level_nodes(level: int):
    """Unit-interval nodes added at ``level`` (step ``h = 2**-level``).

    Returns ``(dl, dr, w)`` with ``dl + dr = 1`` and weights already
    multiplied by ``h``.
    """
    h = 2.0 ** -level
    if level == 0:
        t = np.arange(-int(T_MAX), int(T_MAX) + 1, dtype=float)
    else:
        j = np.arange(1, int(T_MAX / h) + 1, 2)
        t = np.concatenate([-(j[::-1] * h), j * h])
    s = 0.5 * math.pi * np.sinh(t)
    dl = 1.0 / (1.0 + np.exp(-2.0 * s))
    dr = 1.0 / (1.0 + np.exp(2.0 * s))
    w = h * 0.25 * math.pi * np.cosh(t) / np.cosh(s) ** 2
    keep = (dl > 0) & (dr > 0) & (w > 0)
    for arr in (dl, dr, w):
        arr.setflags(write=False)
    return dl[keep], dr[keep], w[keep]


def tanh_sinh(f, length: float, rtol: float = 1e-12, min_level: int = 3,
              max_level: int = 14) -> QuadResult:
    """Integrate over an interval of the given ``length``.

    Parameters
    ----------
    f : callable
        ``f(dl, dr) -> array`` of shape ``(ncomp, n)`` or ``(n,)`` where
        ``dl``/``dr`` are node distances from the left/right endpoint.
    length : float
        Interval length, ``> 0``.
    rtol : float
        Stop once successive halvings of the step change every component by
        at most ``rtol`` relative to its magnitude.

    Returns
    -------
    QuadResult
        ``error`` is the last relative change between levels; since the rule
        roughly doubles the number of correct digits per level this is a
        pessimistic estimate.
    """
    total = None
    prev = None
    n_eval = 0
    err = math.inf
    for level in range(max_level + 1):
        dl, dr, w = _level_nodes(level)
        vals = np.atleast_2d(np.asarray(f(length * dl, length * dr), dtype=float))
        n_eval += dl.size
        part = vals @ w
        # halving h halves every previously accumulated weight
        total = part if total is None else 0.5 * total + part
        est = length * total
        if prev is not None:
            scale = np.maximum(np.abs(est), np.finfo(float).tiny)
            err = float(np.max(np.abs(est - prev) / scale))
            if level >= min_level and err <= rtol:
                return QuadResult(est, err, level, n_eval)
        prev = est
    return QuadResult(est, err, max_level, n_eval)
