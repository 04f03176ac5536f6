"""Minimal dependency-free SVG line charts.

CSV files are the data contract; these charts are a convenience view of
the same numbers.  One axes box, linear scales, a polyline per series.
"""

from __future__ import annotations

from pathlib import Path

_PALETTE = ["#2c7fb8", "#d95f0e", "#31a354", "#756bb1", "#636363",
            "#dd1c77", "#8c6d31", "#3182bd"]

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 58, 16, 34, 44


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    return [lo + span * i / (n - 1) for i in range(n)]


def line_chart(series, path, title: str = "", xlabel: str = "",
               ylabel: str = "", logx: bool = False) -> None:
    """Write a chart of ``series = [(xs, ys, label), ...]`` to ``path``."""
    import math

    pts = [(math.log10(x) if logx else x, y)
           for xs, ys, _ in series for x, y in zip(xs, ys)]
    if not pts:
        raise ValueError("line_chart needs at least one point")
    xlo = min(p[0] for p in pts)
    xhi = max(p[0] for p in pts)
    ylo = min(p[1] for p in pts)
    yhi = max(p[1] for p in pts)
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        yhi = ylo + 1.0
    px = lambda x: _ML + (x - xlo) / (xhi - xlo) * (_W - _ML - _MR)
    py = lambda y: _H - _MB - (y - ylo) / (yhi - ylo) * (_H - _MT - _MB)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
           f'height="{_H}" viewBox="0 0 {_W} {_H}">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>',
           f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
           f'height="{_H - _MT - _MB}" fill="none" stroke="#333"/>']
    if title:
        out.append(f'<text x="{_W / 2}" y="20" text-anchor="middle" '
                   f'font-size="14" font-family="sans-serif">{title}</text>')
    for tx in _ticks(xlo, xhi):
        label = f"1e{tx:.2g}" if logx else f"{tx:.3g}"
        out.append(f'<text x="{px(tx):.1f}" y="{_H - _MB + 16}" '
                   f'text-anchor="middle" font-size="10" '
                   f'font-family="sans-serif">{label}</text>')
        out.append(f'<line x1="{px(tx):.1f}" y1="{_H - _MB}" '
                   f'x2="{px(tx):.1f}" y2="{_H - _MB + 4}" stroke="#333"/>')
    for ty in _ticks(ylo, yhi):
        out.append(f'<text x="{_ML - 6}" y="{py(ty) + 3:.1f}" '
                   f'text-anchor="end" font-size="10" '
                   f'font-family="sans-serif">{ty:.3g}</text>')
        out.append(f'<line x1="{_ML - 4}" y1="{py(ty):.1f}" x2="{_ML}" '
                   f'y2="{py(ty):.1f}" stroke="#333"/>')
    if xlabel:
        out.append(f'<text x="{_W / 2}" y="{_H - 8}" text-anchor="middle" '
                   f'font-size="12" font-family="sans-serif">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="14" y="{_H / 2}" text-anchor="middle" '
                   f'font-size="12" font-family="sans-serif" '
                   f'transform="rotate(-90 14 {_H / 2})">{ylabel}</text>')
    legend_y = _MT + 12
    seen = set()
    for idx, (xs, ys, label) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        coords = " ".join(
            f"{px(math.log10(x) if logx else x):.1f},{py(y):.1f}"
            for x, y in zip(xs, ys))
        out.append(f'<polyline points="{coords}" fill="none" '
                   f'stroke="{color}" stroke-width="1.4"/>')
        if label and label not in seen:
            seen.add(label)
            out.append(f'<line x1="{_W - _MR - 110}" y1="{legend_y}" '
                       f'x2="{_W - _MR - 90}" y2="{legend_y}" '
                       f'stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{_W - _MR - 84}" y="{legend_y + 4}" '
                       f'font-size="11" font-family="sans-serif">{label}</text>')
            legend_y += 16
    out.append("</svg>")
    Path(path).write_text("\n".join(out), encoding="utf-8")
