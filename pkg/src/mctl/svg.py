"""Tiny SVG writer for convergence curves (one small panel per loss term)."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

PANEL_W, PANEL_H, PAD = 220, 150, 34


def _polyline(values, x0, y0):
    v = np.asarray(values, dtype=np.float64)
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo if hi > lo else 1.0
    n = max(len(v) - 1, 1)
    w, h = PANEL_W - 2 * PAD, PANEL_H - 2 * PAD
    pts = " ".join(
        f"{x0 + PAD + w * i / n:.2f},{y0 + PAD + h * (1 - (val - lo) / span):.2f}"
        for i, val in enumerate(v)
    )
    return pts, lo, hi


def convergence_svg(history: Sequence, path, title: str = "convergence") -> None:
    """Write one panel per LossBreakdown field against the outer iteration."""
    names = ("total", "lgdm", "ggdm", "nuclear", "penalty")
    cols = len(names)
    width, height = cols * PANEL_W, PANEL_H + 24
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        f'<text x="6" y="16" font-size="13">{escape(title)}</text>',
    ]
    for c, name in enumerate(names):
        x0, y0 = c * PANEL_W, 24
        out.append(
            f'<rect x="{x0 + PAD}" y="{y0 + PAD}" width="{PANEL_W - 2 * PAD}" '
            f'height="{PANEL_H - 2 * PAD}" fill="none" stroke="#bbb"/>'
        )
        out.append(f'<text x="{x0 + PAD}" y="{y0 + PAD - 6}">{name}</text>')
        values = [getattr(h, name) for h in history]
        if values:
            pts, lo, hi = _polyline(values, x0, y0)
            out.append(f'<polyline points="{pts}" fill="none" stroke="#1f5fa8" stroke-width="1.5"/>')
            out.append(f'<text x="{x0 + 2}" y="{y0 + PAD + 4}" font-size="9">{hi:.3g}</text>')
            out.append(f'<text x="{x0 + 2}" y="{y0 + PANEL_H - PAD}" font-size="9">{lo:.3g}</text>')
            out.append(
                f'<text x="{x0 + PANEL_W - PAD - 18}" y="{y0 + PANEL_H - PAD + 14}" '
                f'font-size="9">it {len(values)}</text>'
            )
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")
