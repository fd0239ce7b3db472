"""Minimal deterministic SVG charts (scatter/line on linear or log axes, histograms)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 440
LEFT, RIGHT, TOP, BOTTOM = 80, 20, 40, 60
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]


def _n(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
        return [10.0**e for e in range(a, b + 1) if lo <= 10.0**e <= hi] or [lo, hi]
    return [lo + (hi - lo) * i / 4 for i in range(5)]


class _Axes:
    def __init__(self, xlim, ylim, logx, logy):
        self.xlim, self.ylim, self.logx, self.logy = xlim, ylim, logx, logy

    def _frac(self, v, lim, log):
        lo, hi = lim
        if log:
            v, lo, hi = math.log10(v), math.log10(lo), math.log10(hi)
        return 0.5 if hi == lo else (v - lo) / (hi - lo)

    def px(self, x):
        return LEFT + self._frac(x, self.xlim, self.logx) * (WIDTH - LEFT - RIGHT)

    def py(self, y):
        return HEIGHT - BOTTOM - self._frac(y, self.ylim, self.logy) * (HEIGHT - TOP - BOTTOM)


def _limits(values, log, pad=0.05):
    vals = [v for v in values if (v > 0 if log else math.isfinite(v))]
    lo, hi = min(vals), max(vals)
    if log:
        return lo / 1.3, hi * 1.3
    span = hi - lo or abs(hi) or 1.0
    return lo - pad * span, hi + pad * span


def _frame(ax, title, xlabel, ylabel):
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{HEIGHT - BOTTOM}" x2="{WIDTH - RIGHT}" y2="{HEIGHT - BOTTOM}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{HEIGHT - BOTTOM}" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="18" y="{HEIGHT / 2}" text-anchor="middle" '
        f'transform="rotate(-90 18 {HEIGHT / 2})">{escape(ylabel)}</text>',
    ]
    for t in _ticks(*ax.xlim, ax.logx):
        x = _n(ax.px(t))
        out.append(f'<line x1="{x}" y1="{HEIGHT - BOTTOM}" x2="{x}" y2="{HEIGHT - BOTTOM + 5}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{HEIGHT - BOTTOM + 18}" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(*ax.ylim, ax.logy):
        y = _n(ax.py(t))
        out.append(f'<line x1="{LEFT - 5}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y}" text-anchor="end" dominant-baseline="middle">{t:.3g}</text>')
    return out


def _legend(labels):
    out = []
    for i, (label, color) in enumerate(labels):
        y = TOP + 8 + 16 * i
        out.append(f'<rect x="{WIDTH - RIGHT - 190}" y="{y - 8}" width="12" height="10" fill="{color}"/>')
        out.append(f'<text x="{WIDTH - RIGHT - 172}" y="{y}">{escape(label)}</text>')
    return out


def xy_chart(series, title="", xlabel="", ylabel="", logx=False, logy=False) -> str:
    """``series``: list of (label, xs, ys, style) with style "line" or "points"."""
    xs = [x for s in series for x in s[1]]
    ys = [y for s in series for y in s[2]]
    ax = _Axes(_limits(xs, logx, 0.0), _limits(ys, logy), logx, logy)
    out = _frame(ax, title, xlabel, ylabel)
    labels = []
    for i, (label, sx, sy, style) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        labels.append((label, color))
        pts = [(ax.px(x), ax.py(y)) for x, y in zip(sx, sy)
               if (x > 0 or not logx) and (y > 0 or not logy)]
        if style == "line":
            path = " ".join(f"{_n(a)},{_n(b)}" for a, b in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>')
        else:
            out.extend(f'<circle cx="{_n(a)}" cy="{_n(b)}" r="3.5" fill="{color}"/>' for a, b in pts)
    out.extend(_legend(labels))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def histogram_chart(groups, bins=20, title="", xlabel="", marker=None) -> str:
    """Overlaid histograms of ``groups``: list of (label, values)."""
    vals = [v for _, g in groups for v in g]
    lo, hi = min(vals + ([marker] if marker is not None else [])), max(vals + ([marker] if marker is not None else []))
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    width = (hi - lo) / bins
    counts = []
    for _, g in groups:
        c = [0] * bins
        for v in g:
            c[min(int((v - lo) / width), bins - 1)] += 1
        counts.append(c)
    ax = _Axes((lo, hi), (0, max(max(c) for c in counts) * 1.1), False, False)
    out = _frame(ax, title, xlabel, "count")
    labels = []
    for gi, ((label, _), c) in enumerate(zip(groups, counts)):
        color = COLORS[gi % len(COLORS)]
        labels.append((label, color))
        for b, n in enumerate(c):
            if n == 0:
                continue
            x0, x1 = ax.px(lo + b * width), ax.px(lo + (b + 1) * width)
            y = ax.py(n)
            out.append(f'<rect x="{_n(x0)}" y="{_n(y)}" width="{_n(x1 - x0)}" '
                       f'height="{_n(ax.py(0) - y)}" fill="{color}" fill-opacity="0.5"/>')
    if marker is not None:
        x = _n(ax.px(marker))
        out.append(f'<line x1="{x}" y1="{TOP}" x2="{x}" y2="{HEIGHT - BOTTOM}" stroke="black" stroke-dasharray="4 3"/>')
        labels.append((f"true = {marker:g}", "black"))
    out.extend(_legend(labels))
    out.append("</svg>")
    return "\n".join(out) + "\n"
