"""Minimal SVG line plots so experiment output needs no plotting library."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02")
W, H, PAD = 640, 420, 56


def _scale(lo: float, hi: float, a: float, b: float):
    span = (hi - lo) or 1.0
    return lambda v: a + (np.asarray(v, dtype=float) - lo) / span * (b - a)


def line_plot(
    path: str | Path,
    lines: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    band: tuple[Sequence[float], Sequence[float], Sequence[float]] | None = None,
    markers: bool = False,
) -> None:
    """Write ``lines`` (label, x, y) as an SVG; ``band`` is (x, lower, upper) shaded grey."""
    xs = [np.asarray(x, float) for _, x, _ in lines]
    ys = [np.asarray(y, float) for _, _, y in lines]
    if band is not None:
        xs.append(np.asarray(band[0], float))
        ys += [np.asarray(band[1], float), np.asarray(band[2], float)]
    xall, yall = np.concatenate(xs), np.concatenate(ys)
    xlo, xhi = float(xall.min()), float(xall.max())
    ylo, yhi = float(yall.min()), float(yall.max())
    pad_y = 0.05 * ((yhi - ylo) or 1.0)
    ylo, yhi = ylo - pad_y, yhi + pad_y
    fx = _scale(xlo, xhi, PAD, W - PAD)
    fy = _scale(ylo, yhi, H - PAD, PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<text x="{W / 2}" y="{H - 14}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="16" y="{H / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {H / 2})">{escape(ylabel)}</text>',
    ]
    for v in np.linspace(xlo, xhi, 5):
        out.append(f'<text x="{fx(v):.1f}" y="{H - PAD + 16}" text-anchor="middle">{v:.3g}</text>')
    for v in np.linspace(ylo, yhi, 5):
        out.append(f'<text x="{PAD - 6}" y="{fy(v) + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    if ylo < 0 < yhi:
        out.append(f'<line x1="{PAD}" y1="{fy(0):.1f}" x2="{W - PAD}" y2="{fy(0):.1f}" '
                   'stroke="#999" stroke-dasharray="4 3"/>')
    if band is not None:
        bx, blo, bhi = (np.asarray(a, float) for a in band)
        pts = [f"{fx(x):.1f},{fy(y):.1f}" for x, y in zip(bx, bhi)]
        pts += [f"{fx(x):.1f},{fy(y):.1f}" for x, y in zip(bx[::-1], blo[::-1])]
        out.append(f'<polygon points="{" ".join(pts)}" fill="#ccc" opacity="0.7"/>')
    for i, (label, x, y) in enumerate(lines):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{fx(a):.1f},{fy(b):.1f}" for a, b in zip(x, y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.8"/>')
        if markers:
            out += [f'<circle cx="{fx(a):.1f}" cy="{fy(b):.1f}" r="3" fill="{color}"/>'
                    for a, b in zip(x, y)]
        ly = PAD + 16 * i
        out.append(f'<line x1="{W - PAD - 120}" y1="{ly}" x2="{W - PAD - 100}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{W - PAD - 95}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
