"""Minimal static SVG line plots.

Hand-rolled rather than delegated to a plotting library so that output bytes
are a pure function of the data (no timestamps, random ids, or font
probing): every series is one ``<polyline>``, an optional uncertainty band
is one ``<polygon>`` behind it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Series", "line_plot", "write_line_plot"]

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
_MARGIN = {"left": 62.0, "right": 16.0, "top": 34.0, "bottom": 46.0}


@dataclass(frozen=True)
class Series:
    """One curve: values per x position and an optional +/- band half-width."""

    label: str
    y: np.ndarray
    band: np.ndarray | None = None


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def line_plot(
    x,
    series: list[Series],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    width: int = 720,
    height: int = 420,
) -> str:
    """Render curves over a shared x axis; returns the SVG document."""
    xs = np.asarray(x, dtype=float)
    if xs.size == 0 or not series:
        raise ValueError("need at least one x position and one series")
    los, his = [], []
    for s in series:
        band = np.zeros_like(s.y) if s.band is None else s.band
        los.append(float(np.min(s.y - band)))
        his.append(float(np.max(s.y + band)))
    y_lo, y_hi = min(los), max(his)
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    x_lo, x_hi = float(xs.min()), float(xs.max())
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0

    plot_w = width - _MARGIN["left"] - _MARGIN["right"]
    plot_h = height - _MARGIN["top"] - _MARGIN["bottom"]

    def sx(v: float) -> float:
        return _MARGIN["left"] + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v: float) -> float:
        return _MARGIN["top"] + (y_hi - v) / (y_hi - y_lo) * plot_h

    def pts(xv: np.ndarray, yv: np.ndarray) -> str:
        return " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(xv, yv))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    # axes box and ticks
    x0, y0 = _MARGIN["left"], _MARGIN["top"]
    parts.append(
        f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{plot_w:.2f}" '
        f'height="{plot_h:.2f}" fill="none" stroke="#444" stroke-width="1"/>'
    )
    for tv in _ticks(x_lo, x_hi):
        px = sx(tv)
        parts.append(
            f'<line x1="{px:.2f}" y1="{sy(y_lo):.2f}" x2="{px:.2f}" '
            f'y2="{sy(y_lo) + 5:.2f}" stroke="#444" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{sy(y_lo) + 19:.2f}" font-size="11" '
            f'text-anchor="middle" fill="#222">{_fmt(tv)}</text>'
        )
    for tv in _ticks(y_lo, y_hi):
        py = sy(tv)
        parts.append(
            f'<line x1="{x0 - 5:.2f}" y1="{py:.2f}" x2="{x0:.2f}" '
            f'y2="{py:.2f}" stroke="#444" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x0 - 8:.2f}" y="{py + 4:.2f}" font-size="11" '
            f'text-anchor="end" fill="#222">{_fmt(tv)}</text>'
        )
    if title:
        parts.append(
            f'<text x="{width / 2:.2f}" y="20" font-size="14" '
            f'text-anchor="middle" fill="#000">{title}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{x0 + plot_w / 2:.2f}" y="{height - 10:.2f}" '
            f'font-size="12" text-anchor="middle" fill="#000">{xlabel}</text>'
        )
    if ylabel:
        cy = y0 + plot_h / 2
        parts.append(
            f'<text x="14" y="{cy:.2f}" font-size="12" text-anchor="middle" '
            f'fill="#000" transform="rotate(-90 14 {cy:.2f})">{ylabel}</text>'
        )
    # bands first so every polyline stays visible
    for i, s in enumerate(series):
        if s.band is not None:
            upper = pts(xs, s.y + s.band)
            lower = pts(xs[::-1], (s.y - s.band)[::-1])
            parts.append(
                f'<polygon points="{upper} {lower}" '
                f'fill="{_PALETTE[i % len(_PALETTE)]}" fill-opacity="0.18" '
                f'stroke="none"/>'
            )
    for i, s in enumerate(series):
        parts.append(
            f'<polyline points="{pts(xs, s.y)}" fill="none" '
            f'stroke="{_PALETTE[i % len(_PALETTE)]}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{width - _MARGIN["right"] - 6:.2f}" '
            f'y="{y0 + 16 + 16 * i:.2f}" font-size="12" text-anchor="end" '
            f'fill="{_PALETTE[i % len(_PALETTE)]}">{s.label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_line_plot(path, x, series: list[Series], **kwargs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(line_plot(x, series, **kwargs))
