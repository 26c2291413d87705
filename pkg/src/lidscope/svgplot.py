"""Tiny deterministic SVG charts.

Hand-rolled on purpose: the output contains nothing but the data (no
timestamps, no generated ids, no library version strings), so rerunning a
command over identical inputs yields byte-identical chart files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

_WIDTH = 720
_HEIGHT = 460
_MARGIN_LEFT = 78
_MARGIN_RIGHT = 24
_MARGIN_TOP = 42
_MARGIN_BOTTOM = 58

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_FONT = 'font-family="Helvetica,Arial,sans-serif"'


def _px(value: float) -> str:
    return f"{value:.2f}"


def _tick(value: float) -> str:
    return f"{value:.6g}"


def _span(values: Sequence[float]) -> tuple[float, float]:
    lo = min(values)
    hi = max(values)
    if lo == hi:
        lo -= 1.0
        hi += 1.0
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


class _Canvas:
    def __init__(self, title: str, x_label: str, y_label: str) -> None:
        self.parts: list[str] = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
            f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
            f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
            f'<text x="{_WIDTH / 2:.0f}" y="24" text-anchor="middle" '
            f'font-size="15" {_FONT}>{_escape(title)}</text>',
            f'<text x="{_WIDTH / 2:.0f}" y="{_HEIGHT - 12}" text-anchor="middle" '
            f'font-size="12" {_FONT}>{_escape(x_label)}</text>',
            f'<text x="18" y="{_HEIGHT / 2:.0f}" text-anchor="middle" '
            f'font-size="12" {_FONT} transform="rotate(-90 18 {_HEIGHT / 2:.0f})">'
            f"{_escape(y_label)}</text>",
        ]

    def add(self, fragment: str) -> None:
        self.parts.append(fragment)

    def write(self, path: Path) -> None:
        self.parts.append("</svg>")
        path.write_text("\n".join(self.parts) + "\n", encoding="utf-8")


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def _x_to_px(x: float, lo: float, hi: float) -> float:
    usable = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    return _MARGIN_LEFT + (x - lo) / (hi - lo) * usable


def _y_to_px(y: float, lo: float, hi: float) -> float:
    usable = _HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM
    return _HEIGHT - _MARGIN_BOTTOM - (y - lo) / (hi - lo) * usable


def _axes(canvas: _Canvas, x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> None:
    left, right = _MARGIN_LEFT, _WIDTH - _MARGIN_RIGHT
    top, bottom = _MARGIN_TOP, _HEIGHT - _MARGIN_BOTTOM
    canvas.add(
        f'<rect x="{left}" y="{top}" width="{right - left}" '
        f'height="{bottom - top}" fill="none" stroke="#444444"/>'
    )
    for i in range(5):
        frac = i / 4
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        xp = _x_to_px(xv, x_lo, x_hi)
        yp = _y_to_px(yv, y_lo, y_hi)
        canvas.add(
            f'<line x1="{_px(xp)}" y1="{bottom}" x2="{_px(xp)}" '
            f'y2="{bottom + 5}" stroke="#444444"/>'
        )
        canvas.add(
            f'<text x="{_px(xp)}" y="{bottom + 18}" text-anchor="middle" '
            f'font-size="11" {_FONT}>{_tick(xv)}</text>'
        )
        canvas.add(
            f'<line x1="{left - 5}" y1="{_px(yp)}" x2="{left}" '
            f'y2="{_px(yp)}" stroke="#444444"/>'
        )
        canvas.add(
            f'<text x="{left - 8}" y="{_px(yp + 4)}" text-anchor="end" '
            f'font-size="11" {_FONT}>{_tick(yv)}</text>'
        )


def line_chart(
    path: str | Path,
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str,
    x_label: str,
    y_label: str,
) -> None:
    """Write a multi-series line chart; one (label, xs, ys) per series."""
    if not series:
        raise ValueError("line_chart needs at least one series")
    all_x = [float(x) for _, xs, _ in series for x in xs]
    all_y = [float(y) for _, _, ys in series for y in ys]
    if not all_x:
        raise ValueError("line_chart needs at least one data point")
    x_lo, x_hi = _span(all_x)
    y_lo, y_hi = _span(all_y)
    canvas = _Canvas(title, x_label, y_label)
    _axes(canvas, x_lo, x_hi, y_lo, y_hi)
    for idx, (label, xs, ys) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = [
            (_x_to_px(float(x), x_lo, x_hi), _y_to_px(float(y), y_lo, y_hi))
            for x, y in zip(xs, ys)
        ]
        if len(pts) > 1:
            joined = " ".join(f"{_px(x)},{_px(y)}" for x, y in pts)
            canvas.add(
                f'<polyline points="{joined}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"/>'
            )
        for x, y in pts:
            canvas.add(
                f'<circle cx="{_px(x)}" cy="{_px(y)}" r="2.5" fill="{color}"/>'
            )
        ly = _MARGIN_TOP + 14 + 16 * idx
        lx = _WIDTH - _MARGIN_RIGHT - 150
        canvas.add(
            f'<rect x="{lx}" y="{ly - 9}" width="10" height="10" fill="{color}"/>'
        )
        canvas.add(
            f'<text x="{lx + 15}" y="{ly}" font-size="11" {_FONT}>'
            f"{_escape(label)}</text>"
        )
    canvas.write(Path(path))


def box_chart(
    path: str | Path,
    groups: Sequence[tuple[str, float, float, float, float, float]],
    title: str,
    y_label: str,
    x_label: str = "",
) -> None:
    """Write a box-summary chart; one (label, lo, q1, median, q3, hi) per group."""
    if not groups:
        raise ValueError("box_chart needs at least one group")
    all_y = [v for _, lo, q1, med, q3, hi in groups for v in (lo, q1, med, q3, hi)]
    y_lo, y_hi = _span(all_y)
    canvas = _Canvas(title, x_label, y_label)
    _axes(canvas, 0.0, float(len(groups)), y_lo, y_hi)
    usable = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    slot = usable / len(groups)
    box_w = min(40.0, slot * 0.5)
    for idx, (label, lo, q1, med, q3, hi) in enumerate(groups):
        cx = _MARGIN_LEFT + slot * (idx + 0.5)
        color = _PALETTE[idx % len(_PALETTE)]
        y_q1 = _y_to_px(q1, y_lo, y_hi)
        y_q3 = _y_to_px(q3, y_lo, y_hi)
        y_med = _y_to_px(med, y_lo, y_hi)
        y_lo_px = _y_to_px(lo, y_lo, y_hi)
        y_hi_px = _y_to_px(hi, y_lo, y_hi)
        canvas.add(
            f'<line x1="{_px(cx)}" y1="{_px(y_lo_px)}" x2="{_px(cx)}" '
            f'y2="{_px(y_hi_px)}" stroke="{color}"/>'
        )
        canvas.add(
            f'<rect x="{_px(cx - box_w / 2)}" y="{_px(y_q3)}" '
            f'width="{_px(box_w)}" height="{_px(max(y_q1 - y_q3, 0.0))}" '
            f'fill="{color}" fill-opacity="0.35" stroke="{color}"/>'
        )
        canvas.add(
            f'<line x1="{_px(cx - box_w / 2)}" y1="{_px(y_med)}" '
            f'x2="{_px(cx + box_w / 2)}" y2="{_px(y_med)}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        canvas.add(
            f'<text x="{_px(cx)}" y="{_HEIGHT - _MARGIN_BOTTOM + 18}" '
            f'text-anchor="middle" font-size="10" {_FONT}>'
            f"{_escape(label)}</text>"
        )
    canvas.write(Path(path))
