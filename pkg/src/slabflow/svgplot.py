"""Minimal deterministic SVG line plots.

The harness writes small summary plots without any plotting dependency;
CSV stays the canonical artifact.  Output is a pure function of the data,
so identical runs produce byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

_PALETTE = ("#1f6fb4", "#d64545", "#3a9a5c", "#8455b0", "#c98a1c", "#4a4a4a")

_WIDTH = 720
_HEIGHT = 500
_MARGIN_L = 78
_MARGIN_R = 24
_MARGIN_T = 46
_MARGIN_B = 64


@dataclass
class Series:
    xs: list[float]
    ys: list[float]
    label: str = ""
    marker: bool = True


@dataclass
class LinePlot:
    title: str
    xlabel: str
    ylabel: str
    logx: bool = False
    logy: bool = False
    series: list[Series] = field(default_factory=list)

    def add(self, xs, ys, label: str = "", marker: bool = True) -> None:
        self.series.append(Series([float(v) for v in xs], [float(v) for v in ys], label, marker))

    def render(self) -> str:
        return _render(self)


def _transform(value: float, log: bool) -> float:
    if log:
        if value <= 0.0:
            raise ValueError("log axis requires positive data")
        return math.log10(value)
    return value


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    else:
        step = 10.0 * mag
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _log_ticks(lo: float, hi: float) -> list[float]:
    lo_d = math.floor(lo)
    hi_d = math.ceil(hi)
    if hi_d - lo_d <= 8:
        return [float(d) for d in range(lo_d, hi_d + 1)]
    stride = math.ceil((hi_d - lo_d) / 8)
    return [float(d) for d in range(lo_d, hi_d + 1, stride)]


def _fmt_tick(value: float, log: bool) -> str:
    if log:
        return f"1e{int(value)}" if value != int(value) else f"1e{int(value)}"
    if value == 0.0:
        return "0"
    if abs(value) >= 1e4 or abs(value) < 1e-3:
        return f"{value:.1e}"
    return f"{value:g}"


def _render(plot: LinePlot) -> str:
    pts = [
        (_transform(x, plot.logx), _transform(y, plot.logy))
        for s in plot.series
        for x, y in zip(s.xs, s.ys)
    ]
    if not pts:
        raise ValueError("nothing to plot")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    x_pad = 0.04 * (x_hi - x_lo)
    y_pad = 0.06 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    inner_w = _WIDTH - _MARGIN_L - _MARGIN_R
    inner_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(v: float) -> float:
        return _MARGIN_L + (v - x_lo) / (x_hi - x_lo) * inner_w

    def sy(v: float) -> float:
        return _HEIGHT - _MARGIN_B - (v - y_lo) / (y_hi - y_lo) * inner_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15" fill="#222">{plot.title}</text>',
    ]

    x_ticks = _log_ticks(x_lo, x_hi) if plot.logx else _nice_ticks(x_lo, x_hi)
    y_ticks = _log_ticks(y_lo, y_hi) if plot.logy else _nice_ticks(y_lo, y_hi)
    for t in x_ticks:
        if not x_lo <= t <= x_hi:
            continue
        px = sx(t)
        out.append(
            f'<line x1="{px:.2f}" y1="{_MARGIN_T}" x2="{px:.2f}" '
            f'y2="{_HEIGHT - _MARGIN_B}" stroke="#e0e0e0" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{px:.2f}" y="{_HEIGHT - _MARGIN_B + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" fill="#444">{_fmt_tick(t, plot.logx)}</text>'
        )
    for t in y_ticks:
        if not y_lo <= t <= y_hi:
            continue
        py = sy(t)
        out.append(
            f'<line x1="{_MARGIN_L}" y1="{py:.2f}" x2="{_WIDTH - _MARGIN_R}" '
            f'y2="{py:.2f}" stroke="#e0e0e0" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_MARGIN_L - 8}" y="{py + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12" fill="#444">{_fmt_tick(t, plot.logy)}</text>'
        )

    out.append(
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{inner_w}" height="{inner_h}" '
        f'fill="none" stroke="#555" stroke-width="1"/>'
    )
    out.append(
        f'<text x="{_MARGIN_L + inner_w / 2:.1f}" y="{_HEIGHT - 16}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" fill="#222">{plot.xlabel}</text>'
    )
    out.append(
        f'<text x="20" y="{_MARGIN_T + inner_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" fill="#222" '
        f'transform="rotate(-90 20 {_MARGIN_T + inner_h / 2:.1f})">{plot.ylabel}</text>'
    )

    for idx, s in enumerate(plot.series):
        color = _PALETTE[idx % len(_PALETTE)]
        coords = [
            (sx(_transform(x, plot.logx)), sy(_transform(y, plot.logy)))
            for x, y in zip(s.xs, s.ys)
        ]
        path = " ".join(f"{px:.2f},{py:.2f}" for px, py in coords)
        out.append(
            f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.8"/>'
        )
        if s.marker:
            for px, py in coords:
                out.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" fill="{color}"/>')
        if s.label:
            ly = _MARGIN_T + 16 + 18 * idx
            lx = _WIDTH - _MARGIN_R - 160
            out.append(
                f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                f'stroke="{color}" stroke-width="2"/>'
            )
            out.append(
                f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" '
                f'font-size="12" fill="#222">{s.label}</text>'
            )

    out.append("</svg>")
    return "\n".join(out) + "\n"
