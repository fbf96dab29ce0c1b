"""Minimal SVG writer for report plots (no external renderer)."""

from __future__ import annotations


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def svg_scatter(xs, ys, title="", xlabel="", ylabel="", line=None,
                width=640, height=480):
    """Scatter plot with optional fitted line ((slope, intercept))."""
    m = 60
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    padx = 0.05 * (x1 - x0)
    pady = 0.05 * (y1 - y0)
    x0, x1 = x0 - padx, x1 + padx
    y0, y1 = y0 - pady, y1 + pady

    def px(x):
        return m + (x - x0) / (x1 - x0) * (width - 2 * m)

    def py(y):
        return height - m - (y - y0) / (y1 - y0) * (height - 2 * m)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
             f'font-size="16">{title}</text>']
    parts.append(f'<line x1="{m}" y1="{height - m}" x2="{width - m}" '
                 f'y2="{height - m}" stroke="black"/>')
    parts.append(f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" '
                 f'stroke="black"/>')
    for t in _ticks(x0, x1):
        parts.append(f'<text x="{px(t):.1f}" y="{height - m + 18:.1f}" '
                     f'text-anchor="middle" font-size="10">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        parts.append(f'<text x="{m - 6:.1f}" y="{py(t) + 3:.1f}" '
                     f'text-anchor="end" font-size="10">{t:.3g}</text>')
    parts.append(f'<text x="{width / 2:.1f}" y="{height - 12}" '
                 f'text-anchor="middle" font-size="12">{xlabel}</text>')
    parts.append(f'<text x="16" y="{height / 2:.1f}" text-anchor="middle" '
                 f'font-size="12" transform="rotate(-90 16 '
                 f'{height / 2:.1f})">{ylabel}</text>')
    if line is not None:
        slope, intercept = line
        parts.append(f'<line x1="{px(x0):.1f}" '
                     f'y1="{py(slope * x0 + intercept):.1f}" '
                     f'x2="{px(x1):.1f}" '
                     f'y2="{py(slope * x1 + intercept):.1f}" '
                     f'stroke="firebrick" stroke-width="1.5"/>')
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="4" '
                     f'fill="steelblue"/>')
    parts.append("</svg>")
    return "\n".join(parts)


def svg_curve(xs, ys, title="", xlabel="", ylabel="", width=640, height=480):
    svg = svg_scatter(xs, ys, title, xlabel, ylabel, width=width,
                      height=height)
    m = 60
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    padx, pady = 0.05 * (x1 - x0), 0.05 * (y1 - y0)
    x0, x1, y0, y1 = x0 - padx, x1 + padx, y0 - pady, y1 + pady
    pts = " ".join(
        f"{m + (x - x0) / (x1 - x0) * (width - 2 * m):.1f},"
        f"{height - m - (y - y0) / (y1 - y0) * (height - 2 * m):.1f}"
        for x, y in zip(xs, ys))
    poly = f'<polyline points="{pts}" fill="none" stroke="steelblue"/>'
    return svg.replace("</svg>", poly + "\n</svg>")
