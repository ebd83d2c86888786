"""Minimal deterministic SVG 1.1 line charts (800x600, no external assets)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 600
MARGIN = dict(left=90, right=30, top=50, bottom=70)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _num(v):
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def nice_ticks(lo, hi, target=6):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0]
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _tick_label(v):
    if v == 0:
        return "0"
    a = abs(v)
    if a >= 1e5 or a < 1e-3:
        return f"{v:.2e}"
    return f"{v:.6g}"


def _limits(arrays, pad=0.04):
    vals = np.concatenate([np.asarray(a, dtype=float).ravel() for a in arrays])
    vals = vals[np.isfinite(vals)]
    if len(vals) == 0:
        return 0.0, 1.0
    lo, hi = float(vals.min()), float(vals.max())
    if hi - lo < 1e-12 * max(1.0, abs(hi)):
        span = max(abs(hi), 1.0) * 0.5
        return lo - span, hi + span
    d = (hi - lo) * pad
    return lo - d, hi + d


def line_chart(series, title, xlabel, ylabel, equal_aspect=False, markers=()):
    """Render ``series`` = [(label, xs, ys), ...] as an SVG document string.

    ``markers`` are (label, x, y) points drawn as small circles.
    """
    xs_all = [s[1] for s in series] + [[m[1]] for m in markers]
    ys_all = [s[2] for s in series] + [[m[2]] for m in markers]
    x0, x1 = _limits(xs_all)
    y0, y1 = _limits(ys_all)
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
    if equal_aspect:
        sx, sy = (x1 - x0) / pw, (y1 - y0) / ph
        s = max(sx, sy)
        cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
        x0, x1 = cx - s * pw / 2, cx + s * pw / 2
        y0, y1 = cy - s * ph / 2, cy + s * ph / 2

    def px(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def py(y):
        return MARGIN["top"] + (y1 - y) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH // 2}" y="30" font-family="sans-serif" font-size="18" '
        f'text-anchor="middle">{escape(title)}</text>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="#000000" stroke-width="1"/>',
    ]
    for v in nice_ticks(x0, x1):
        X = _num(px(v))
        out.append(f'<line x1="{X}" y1="{MARGIN["top"]}" x2="{X}" y2="{MARGIN["top"] + ph}" '
                   'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{X}" y="{MARGIN["top"] + ph + 18}" font-family="sans-serif" '
                   f'font-size="12" text-anchor="middle">{_tick_label(v)}</text>')
    for v in nice_ticks(y0, y1):
        Y = _num(py(v))
        out.append(f'<line x1="{MARGIN["left"]}" y1="{Y}" x2="{MARGIN["left"] + pw}" y2="{Y}" '
                   'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{Y}" font-family="sans-serif" '
                   f'font-size="12" text-anchor="end" dominant-baseline="middle">{_tick_label(v)}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw // 2}" y="{HEIGHT - 20}" font-family="sans-serif" '
               f'font-size="14" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="20" y="{MARGIN["top"] + ph // 2}" font-family="sans-serif" font-size="14" '
               f'text-anchor="middle" transform="rotate(-90 20 {MARGIN["top"] + ph // 2})">'
               f'{escape(ylabel)}</text>')
    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_num(px(x))},{_num(py(y))}"
                       for x, y in zip(np.asarray(xs, float), np.asarray(ys, float))
                       if math.isfinite(x) and math.isfinite(y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = MARGIN["top"] + 16 + 16 * i
        lx = MARGIN["left"] + pw - 140
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}" font-family="sans-serif" font-size="12">'
                   f'{escape(label)}</text>')
    for label, x, y in markers:
        out.append(f'<circle cx="{_num(px(x))}" cy="{_num(py(y))}" r="4" fill="#000000">'
                   f'<title>{escape(label)}</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
