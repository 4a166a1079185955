"""Self-contained SVG plots of localized point clouds over their feasible regions."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from . import catalog
from .region import FeasibleRegion

PANEL = 300
MARGIN = 34
ROWS = (4, 4, 4, 3)

REGION_FILL = "#c8c8c8"
KEPT = "black"
OUTLIER = "red"


def _xy(x, y, size):
    inner = size - 2 * MARGIN
    return MARGIN + x * inner, size - MARGIN - y * inner


def region_path(region: FeasibleRegion, size: int = PANEL) -> str:
    """Closed path tracing the upper steps left to right and the lower steps back."""
    e = region.edges
    pts = []
    for i in range(region.bins):
        pts += [_xy(e[i], region.upper[i], size), _xy(e[i + 1], region.upper[i], size)]
    for i in reversed(range(region.bins)):
        pts += [_xy(e[i + 1], region.lower[i], size), _xy(e[i], region.lower[i], size)]
    return "M " + " L ".join(f"{x:.2f},{y:.2f}" for x, y in pts) + " Z"


def panel(points, kept_mask, region: FeasibleRegion | None, title: str = "", size: int = PANEL,
          diameter: float | None = None, comment: str = "") -> str:
    """One panel as an ``<svg>`` element: gray region, black kept points, red outliers."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    kept_mask = np.ones(len(pts), bool) if kept_mask is None else np.asarray(kept_mask, bool)
    inner = size - 2 * MARGIN
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">']
    if comment:
        out.append(f"<!-- {escape(comment).replace('--', '- -')} -->")
    out.append(f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>')
    if region is not None:
        out.append(f'<path class="region" d="{region_path(region, size)}" fill="{REGION_FILL}" stroke="none"/>')
    out.append(f'<rect class="axes" x="{MARGIN}" y="{MARGIN}" width="{inner}" height="{inner}" fill="none" stroke="black"/>')
    for t in (0.0, 0.5, 1.0):
        x, y0 = _xy(t, 0, size)
        x0, y = _xy(0, t, size)
        out.append(f'<text x="{x:.1f}" y="{y0 + 14:.1f}" font-size="10" text-anchor="middle">{t:g}</text>')
        out.append(f'<text x="{x0 - 4:.1f}" y="{y + 3:.1f}" font-size="10" text-anchor="end">{t:g}</text>')
    if title:
        out.append(f'<text x="{size / 2:.1f}" y="{MARGIN - 10}" font-size="13" text-anchor="middle">{escape(title)}</text>')
    r = 1.6
    for (x, y), keep in zip(pts, kept_mask):
        if keep:
            cx, cy = _xy(x, y, size)
            out.append(f'<circle class="kept" cx="{cx:.2f}" cy="{cy:.2f}" r="{r}" fill="{KEPT}"/>')
    # outliers drawn last so they stay visible over the cloud
    for (x, y), keep in zip(pts, kept_mask):
        if not keep:
            cx, cy = _xy(x, y, size)
            out.append(f'<circle class="outlier" cx="{cx:.2f}" cy="{cy:.2f}" r="{r + 0.6}" fill="{OUTLIER}"/>')
    if diameter is not None:
        out.append(f'<text x="{size - MARGIN:.1f}" y="{size - 6}" font-size="9" text-anchor="end">d = {diameter:.3g}</text>')
    out.append("</svg>")
    return "\n".join(out)


def composite(panels: dict[str, str], size: int = PANEL, comment: str = "") -> str:
    """Fifteen panels in catalogue order, rows of 4, 4, 4 and 3."""
    names = catalog.names()
    cols = max(ROWS)
    width, height = cols * size, len(ROWS) * size
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">']
    if comment:
        out.append(f"<!-- {escape(comment).replace('--', '- -')} -->")
    k = 0
    for row, count in enumerate(ROWS):
        for col in range(count):
            name = names[k]
            k += 1
            body = panels.get(name)
            if body is None:
                continue
            # nested svg elements position each panel
            body = body.replace("<svg ", f'<svg x="{col * size}" y="{row * size}" ', 1)
            out.append(body)
    out.append("</svg>")
    return "\n".join(out)
