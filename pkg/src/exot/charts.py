"""Minimal SVG line charts (fixed 800x600 viewBox, no dependencies).

Output is deterministic: coordinates are formatted with a fixed precision,
so identical data produces byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass

MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 50
WIDTH, HEIGHT = 800, 600
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]


@dataclass(frozen=True)
class Series:
    label: str
    xs: tuple
    ys: tuple
    half_widths: tuple | None = None


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, count: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def line_chart(
    title: str,
    x_label: str,
    y_label: str,
    series,
    reference: float | None = None,
) -> str:
    xs_all = [x for s in series for x in s.xs]
    ys_all = [y for s in series for y in s.ys]
    for s in series:
        if s.half_widths is not None:
            ys_all += [y + h for y, h in zip(s.ys, s.half_widths)]
            ys_all += [y - h for y, h in zip(s.ys, s.half_widths)]
    if reference is not None:
        ys_all.append(reference)
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    pad = 0.05 * (y_hi - y_lo) or 1.0
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def px(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R)

    def py(y):
        return HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH//2}" y="24" text-anchor="middle" font-size="18">{title}</text>',
        f'<text x="{WIDTH//2}" y="{HEIGHT-10}" text-anchor="middle" font-size="13">{x_label}</text>',
        f'<text x="18" y="{HEIGHT//2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {HEIGHT//2})">{y_label}</text>',
    ]
    axis = (
        f'<line x1="{MARGIN_L}" y1="{HEIGHT-MARGIN_B}" x2="{WIDTH-MARGIN_R}" '
        f'y2="{HEIGHT-MARGIN_B}" stroke="black"/>'
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" '
        f'y2="{HEIGHT-MARGIN_B}" stroke="black"/>'
    )
    out.append(axis)
    for t in _ticks(x_lo, x_hi):
        out.append(
            f'<text x="{_fmt(px(t))}" y="{HEIGHT-MARGIN_B+18}" text-anchor="middle" '
            f'font-size="11">{t:.4g}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        out.append(
            f'<text x="{MARGIN_L-8}" y="{_fmt(py(t)+4)}" text-anchor="end" '
            f'font-size="11">{t:.4g}</text>'
        )
    if reference is not None:
        y = _fmt(py(reference))
        out.append(
            f'<line x1="{MARGIN_L}" y1="{y}" x2="{WIDTH-MARGIN_R}" y2="{y}" '
            f'stroke="gray" stroke-dasharray="6,4"/>'
        )
        out.append(
            f'<text x="{WIDTH-MARGIN_R-4}" y="{_fmt(py(reference)-6)}" text-anchor="end" '
            f'font-size="11" fill="gray">reference {reference:.6g}</text>'
        )
    for idx, s in enumerate(series):
        color = COLORS[idx % len(COLORS)]
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(s.xs, s.ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in zip(s.xs, s.ys):
            out.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3" fill="{color}"/>')
        if s.half_widths is not None:
            for x, y, h in zip(s.xs, s.ys, s.half_widths):
                cx = _fmt(px(x))
                out.append(
                    f'<line x1="{cx}" y1="{_fmt(py(y-h))}" x2="{cx}" y2="{_fmt(py(y+h))}" '
                    f'stroke="{color}" stroke-width="1"/>'
                )
        out.append(
            f'<text x="{WIDTH-MARGIN_R-4}" y="{MARGIN_T+16*(idx+1)}" text-anchor="end" '
            f'font-size="12" fill="{color}">{s.label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
