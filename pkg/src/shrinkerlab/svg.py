"""Static SVG rendering of planar curves.

Output is deterministic: no timestamps, and coordinates are rounded to
``1e-6`` of the view box so repeated runs give identical bytes.
"""
from __future__ import annotations

import math

import numpy as np

from .flow import PlanarCurve
from .potential import k_plus

PAD = 0.05
SIZE_PX = 480


def _fmt(v: float, digits: int) -> str:
    s = f"{v:.{digits}f}"
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(curve: PlanarCurve, title: str | None = None) -> str:
    """SVG 1.1 document: the curve as one closed path, the origin and the circle ``r = 1/k_plus``."""
    r = 1.0 / k_plus(curve.lam)
    pts = np.asarray(curve.points, dtype=float)
    # y is flipped so the picture has the usual orientation
    xs, ys = pts[:, 0], -pts[:, 1]
    lo_x, hi_x = min(xs.min(), -r, 0.0), max(xs.max(), r, 0.0)
    lo_y, hi_y = min(ys.min(), -r, 0.0), max(ys.max(), r, 0.0)
    span = max(hi_x - lo_x, hi_y - lo_y)
    pad = PAD * span
    x0, y0 = lo_x - pad, lo_y - pad
    w, h = hi_x - lo_x + 2 * pad, hi_y - lo_y + 2 * pad
    digits = max(0, 6 - math.floor(math.log10(max(w, h))))
    f = lambda v: _fmt(v, digits)

    path = "M" + " L".join(f"{f(a)},{f(b)}" for a, b in zip(xs, ys))
    if curve.closed:
        path += " Z"
    stroke = f(max(w, h) / 400.0)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{SIZE_PX}" height="{round(SIZE_PX * h / w)}" '
        f'viewBox="{f(x0)} {f(y0)} {f(w)} {f(h)}">',
    ]
    if title:
        lines.append(f"<title>{title}</title>")
    lines += [
        f'<circle cx="0" cy="0" r="{f(r)}" fill="none" stroke="#bbbbbb" '
        f'stroke-width="{stroke}" stroke-dasharray="{f(4 * float(stroke))}"/>',
        f'<circle cx="0" cy="0" r="{f(3 * float(stroke))}" fill="#cc3333"/>',
        f'<path d="{path}" fill="none" stroke="#1f4e9a" stroke-width="{f(2 * float(stroke))}" '
        'stroke-linejoin="round"/>',
        "</svg>",
    ]
    return "\n".join(lines) + "\n"
