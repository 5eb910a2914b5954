"""Dependency-free SVG scatter plots of two latent features."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

WIDTH, HEIGHT = 640, 480
MARGIN = 50
LEGEND_W = 120


def _scale(vals, lo_px, hi_px):
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if hi - lo <= 0:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    return lo_px + (np.asarray(vals) - lo) / (hi - lo) * (hi_px - lo_px)


def scatter_svg(x, y, labels, xlabel: str = "z1", ylabel: str = "z2", title: str = "") -> str:
    """One circle per row, one color per distinct label, legend in first-seen order."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    labels = [str(lab) for lab in labels]
    classes = list(dict.fromkeys(labels))
    color = {c: PALETTE[i % len(PALETTE)] for i, c in enumerate(classes)}
    plot_right = WIDTH - LEGEND_W
    px = _scale(x, MARGIN, plot_right - 10)
    py = _scale(y, HEIGHT - MARGIN, 20)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line class="axis" x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{plot_right - 10}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line class="axis" x1="{MARGIN}" y1="20" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{(MARGIN + plot_right) // 2}" y="{HEIGHT - 15}" text-anchor="middle" '
        f'font-size="14">{escape(xlabel)}</text>',
        f'<text x="15" y="{HEIGHT // 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 15 {HEIGHT // 2})">{escape(ylabel)}</text>',
    ]
    if title:
        out.append(f'<text x="{WIDTH // 2}" y="14" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for cx, cy, lab in zip(px, py, labels):
        out.append(
            f'<circle class="point" cx="{cx:.3f}" cy="{cy:.3f}" r="3" fill="{color[lab]}" '
            f'fill-opacity="0.8"/>'
        )
    for i, c in enumerate(classes):
        ly = 30 + 20 * i
        out.append(
            f'<g class="legend-entry"><rect x="{plot_right + 5}" y="{ly - 9}" width="10" '
            f'height="10" fill="{color[c]}"/><text x="{plot_right + 20}" y="{ly}" '
            f'font-size="12">{escape(c)}</text></g>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
