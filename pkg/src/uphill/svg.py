"""Minimal deterministic SVG rendering of stationary profiles and currents.

Densities are dashed, currents solid; species 1 red, species 2 blue.  The
output is plain text with fixed number formatting, so identical inputs give
byte-identical documents apart from the version comment.
"""
from __future__ import annotations

import numpy as np

from . import __version__

WIDTH, HEIGHT = 640, 440
MARGIN = 52
SPECIES_COLORS = ("#cc2222", "#2244cc")


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def _polyline(xs, ys, color, dashed):
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(xs, ys))
    dash = ' stroke-dasharray="7,4"' if dashed else ""
    return (f'<polyline fill="none" stroke="{color}" stroke-width="1.6"{dash} '
            f'points="{pts}"/>')


def emit_svg(samples) -> str:
    """Render profile samples (columns x, rho1, rho2, J1, J2) as an SVG
    document string."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("no profile samples to render")
    if samples.ndim != 2 or samples.shape[1] < 5:
        raise ValueError("samples must have columns x, rho1, rho2, J1, J2")
    x = samples[:, 0]
    curves = samples[:, 1:5]
    lo = min(0.0, float(curves.min()))
    hi = float(curves.max())
    if hi <= lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    plot_w = WIDTH - 2 * MARGIN
    plot_h = HEIGHT - 2 * MARGIN

    def px(xv):
        return MARGIN + (xv - x[0]) / (x[-1] - x[0]) * plot_w

    def py(yv):
        return HEIGHT - MARGIN - (yv - lo) / (hi - lo) * plot_h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- uphill {__version__} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black" stroke-width="1"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black" stroke-width="1"/>',
    ]
    if lo < 0.0 < hi:
        y0 = py(0.0)
        parts.append(f'<line x1="{MARGIN}" y1="{_fmt(y0)}" x2="{WIDTH - MARGIN}" '
                     f'y2="{_fmt(y0)}" stroke="#999999" stroke-width="0.6"/>')
    for tick in (x[0], 0.5 * (x[0] + x[-1]), x[-1]):
        parts.append(f'<text x="{_fmt(px(tick))}" y="{HEIGHT - MARGIN + 18}" '
                     f'font-size="11" text-anchor="middle">{_fmt(tick)}</text>')
    for tick in np.linspace(lo + pad, hi - pad, 5):
        parts.append(f'<text x="{MARGIN - 8}" y="{_fmt(py(tick) + 4)}" '
                     f'font-size="11" text-anchor="end">{_fmt(tick)}</text>')
    xs_px = [px(v) for v in x]
    for col, color, dashed in ((1, SPECIES_COLORS[0], True),
                               (2, SPECIES_COLORS[1], True),
                               (3, SPECIES_COLORS[0], False),
                               (4, SPECIES_COLORS[1], False)):
        ys_px = [py(v) for v in samples[:, col]]
        parts.append(_polyline(xs_px, ys_px, color, dashed))
    legend = (("density 1", SPECIES_COLORS[0], True),
              ("density 2", SPECIES_COLORS[1], True),
              ("current 1", SPECIES_COLORS[0], False),
              ("current 2", SPECIES_COLORS[1], False))
    for i, (label, color, dashed) in enumerate(legend):
        yl = MARGIN + 14 + 16 * i
        dash = ' stroke-dasharray="7,4"' if dashed else ""
        parts.append(f'<line x1="{WIDTH - MARGIN - 150}" y1="{yl}" '
                     f'x2="{WIDTH - MARGIN - 110}" y2="{yl}" stroke="{color}" '
                     f'stroke-width="1.6"{dash}/>')
        parts.append(f'<text x="{WIDTH - MARGIN - 102}" y="{yl + 4}" '
                     f'font-size="11">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
