"""Static SVG rendering of a 2-D decision boundary."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

POS_FILL = "#f4c7a1"
NEG_FILL = "#a9c8ec"
POS_POINT = "#c0392b"
NEG_POINT = "#1f4e99"
SIZE = 480
MARGIN = 40


def _extent(v):
    lo, hi = float(np.min(v)), float(np.max(v))
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def render_boundary_svg(decision, points, signs, labels, grid=200, feature_names=("x1", "x2")) -> str:
    """SVG with a ``grid`` x ``grid`` field coloured by sign(decision) and the points on top.

    ``decision`` maps an (N, 2) array of raw coordinates to N decision values.
    ``signs`` holds +1/-1 per point; ``labels`` is (positive name, negative name).
    """
    pts = np.asarray(points, dtype=float)
    (x0, x1), (y0, y1) = _extent(pts[:, 0]), _extent(pts[:, 1])
    xs = x0 + (np.arange(grid) + 0.5) * (x1 - x0) / grid
    ys = y1 - (np.arange(grid) + 0.5) * (y1 - y0) / grid  # top row first
    gx, gy = np.meshgrid(xs, ys)
    tau = np.asarray(decision(np.column_stack([gx.ravel(), gy.ravel()]))).reshape(grid, grid)
    positive = tau >= 0
    cell = SIZE / grid
    W = SIZE + 2 * MARGIN
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{W}" viewBox="0 0 {W} {W}">',
           f'<rect x="0" y="0" width="{W}" height="{W}" fill="#ffffff"/>',
           '<g id="field" shape-rendering="crispEdges">']
    for r in range(grid):
        row = positive[r]
        start = 0
        for c in range(1, grid + 1):
            if c == grid or row[c] != row[start]:
                fill = POS_FILL if row[start] else NEG_FILL
                out.append(f'<rect x="{MARGIN + start * cell:.3f}" y="{MARGIN + r * cell:.3f}" '
                           f'width="{(c - start) * cell:.3f}" height="{cell:.3f}" fill="{fill}"/>')
                start = c
    out.append("</g>")
    out.append('<g id="points">')
    for (px, py), s in zip(pts, signs):
        sx = MARGIN + (px - x0) / (x1 - x0) * SIZE
        sy = MARGIN + (y1 - py) / (y1 - y0) * SIZE
        colour = POS_POINT if s > 0 else NEG_POINT
        out.append(f'<circle cx="{sx:.3f}" cy="{sy:.3f}" r="3.5" fill="{colour}" stroke="#000000" stroke-width="0.5"/>')
    out.append("</g>")
    out.append(f'<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="#333333"/>')
    fx, fy = (escape(str(n)) for n in feature_names)
    out.append(f'<text x="{MARGIN + SIZE / 2:.1f}" y="{W - 10}" font-size="13" text-anchor="middle">{fx}</text>')
    out.append(f'<text x="12" y="{MARGIN + SIZE / 2:.1f}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 12 {MARGIN + SIZE / 2:.1f})">{fy}</text>')
    pos_name, neg_name = (escape(str(n)) for n in labels)
    out.append(f'<text x="{MARGIN}" y="{MARGIN - 12}" font-size="12" fill="{POS_POINT}">+ {pos_name}</text>')
    out.append(f'<text x="{MARGIN + 160}" y="{MARGIN - 12}" font-size="12" fill="{NEG_POINT}">- {neg_name}</text>')
    out.append(f'<text x="{MARGIN + SIZE}" y="{MARGIN - 12}" font-size="11" text-anchor="end">'
               f'x: [{x0:.3g}, {x1:.3g}]  y: [{y0:.3g}, {y1:.3g}]</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
