"""Minimal SVG line plots (no plotting dependency; diff-able output)."""

from __future__ import annotations

import math

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
_W, _H = 720, 480
_ML, _MR, _MT, _MB = 70, 20, 40, 50


def _ticks(lo: float, hi: float, n: int = 6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * step:
        out.append(round(t, 12))
        t += step
    return out


def write_line_plot(
    path,
    x: np.ndarray,
    series: dict[str, np.ndarray],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    hlines: dict[str, float] | None = None,
) -> None:
    """Write a polyline plot of one or more series over a shared x grid."""
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(v, dtype=float) for v in series.values()]
    finite = np.concatenate([y[np.isfinite(y)] for y in ys]) if ys else np.array([0.0])
    hvals = list((hlines or {}).values())
    ylo = min(float(finite.min()), *hvals) if hvals else float(finite.min())
    yhi = max(float(finite.max()), *hvals) if hvals else float(finite.max())
    pad = 0.05 * (yhi - ylo or 1.0)
    ylo, yhi = ylo - pad, yhi + pad
    xlo, xhi = float(x.min()), float(x.max())
    if xhi <= xlo:
        xhi = xlo + 1.0

    def sx(v):
        return _ML + (v - xlo) / (xhi - xlo) * (_W - _ML - _MR)

    def sy(v):
        return _H - _MB - (v - ylo) / (yhi - ylo) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="monospace" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    for t in _ticks(xlo, xhi):
        px = sx(t)
        parts.append(
            f'<line x1="{px:.1f}" y1="{_H - _MB}" x2="{px:.1f}" y2="{_MT}" '
            f'stroke="#eeeeee"/>'
            f'<text x="{px:.1f}" y="{_H - _MB + 16}" text-anchor="middle">{t:g}</text>'
        )
    for t in _ticks(ylo, yhi):
        py = sy(t)
        parts.append(
            f'<line x1="{_ML}" y1="{py:.1f}" x2="{_W - _MR}" y2="{py:.1f}" '
            f'stroke="#eeeeee"/>'
            f'<text x="{_ML - 6}" y="{py + 4:.1f}" text-anchor="end">{t:g}</text>'
        )
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>'
    )
    for name, level in (hlines or {}).items():
        py = sy(level)
        parts.append(
            f'<line x1="{_ML}" y1="{py:.1f}" x2="{_W - _MR}" y2="{py:.1f}" '
            f'stroke="#888888" stroke-dasharray="6,4"/>'
            f'<text x="{_W - _MR - 4}" y="{py - 4:.1f}" text-anchor="end" '
            f'fill="#555555">{name}</text>'
        )
    for i, (name, y) in enumerate(series.items()):
        y = np.asarray(y, dtype=float)
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(
            f"{sx(xv):.1f},{sy(yv):.1f}"
            for xv, yv in zip(x, y)
            if np.isfinite(yv)
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.2"/>'
        )
        parts.append(
            f'<text x="{_ML + 8}" y="{_MT + 16 + 14 * i}" fill="{color}">{name}</text>'
        )
    parts.append(
        f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>'
        f'<text x="16" y="{_H / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_H / 2})">{ylabel}</text></svg>'
    )
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
