"""Self-contained SVG bar charts for contribution histograms and reports."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

_BAR_W = 46
_GAP = 18
_PLOT_H = 220
_MARGIN_L = 56
_MARGIN_T = 34
_MARGIN_B = 64


def bar_chart_svg(
    labels,
    values,
    *,
    title: str = "",
    y_label: str = "",
    colors=None,
) -> str:
    """Render one bar per label. None values are drawn as hatched placeholders."""
    labels = list(labels)
    numeric = [v for v in values if v is not None]
    lo = min(0.0, min(numeric, default=0.0))
    hi = max(0.0, max(numeric, default=0.0))
    if hi == lo:
        hi = lo + 1.0
    span = hi - lo

    width = _MARGIN_L + len(labels) * (_BAR_W + _GAP) + _GAP
    height = _MARGIN_T + _PLOT_H + _MARGIN_B
    y_of = lambda v: _MARGIN_T + (hi - v) / span * _PLOT_H

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
            f'font-size="14">{escape(title)}</text>'
        )
    if y_label:
        out.append(
            f'<text x="14" y="{_MARGIN_T + _PLOT_H / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 14 {_MARGIN_T + _PLOT_H / 2:.1f})">'
            f"{escape(y_label)}</text>"
        )
    # axes: y with min/zero/max ticks, x baseline at v=0
    zero_y = y_of(0.0)
    out.append(
        f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}" '
        f'y2="{_MARGIN_T + _PLOT_H}" stroke="black"/>'
    )
    for tick in sorted({lo, 0.0, hi}):
        ty = y_of(tick)
        out.append(
            f'<line x1="{_MARGIN_L - 4}" y1="{ty:.1f}" x2="{_MARGIN_L}" '
            f'y2="{ty:.1f}" stroke="black"/>'
        )
        out.append(
            f'<text x="{_MARGIN_L - 7}" y="{ty + 4:.1f}" text-anchor="end">'
            f"{tick:.3g}</text>"
        )
    out.append(
        f'<line x1="{_MARGIN_L}" y1="{zero_y:.1f}" '
        f'x2="{width - _GAP}" y2="{zero_y:.1f}" stroke="black"/>'
    )

    for i, (label, value) in enumerate(zip(labels, values)):
        x = _MARGIN_L + _GAP + i * (_BAR_W + _GAP)
        color = colors[i] if colors else "#4878a8"
        if value is None:
            out.append(
                f'<rect x="{x}" y="{_MARGIN_T}" width="{_BAR_W}" height="{_PLOT_H}" '
                f'fill="none" stroke="#aaaaaa" stroke-dasharray="4 3"/>'
            )
            out.append(
                f'<text x="{x + _BAR_W / 2:.1f}" y="{_MARGIN_T + _PLOT_H / 2:.1f}" '
                f'text-anchor="middle" fill="#888888">n/a</text>'
            )
        else:
            top = y_of(max(value, 0.0))
            h = abs(y_of(value) - zero_y)
            out.append(
                f'<rect x="{x}" y="{top:.1f}" width="{_BAR_W}" height="{h:.1f}" '
                f'fill="{color}"/>'
            )
            out.append(
                f'<text x="{x + _BAR_W / 2:.1f}" y="{top - 4:.1f}" '
                f'text-anchor="middle" font-size="10">{value:.3g}</text>'
            )
        out.append(
            f'<text x="{x + _BAR_W / 2:.1f}" y="{_MARGIN_T + _PLOT_H + 16}" '
            f'text-anchor="middle">{escape(str(label))}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_bar_chart(path: str | Path, labels, values, **kwargs) -> None:
    Path(path).write_text(bar_chart_svg(labels, values, **kwargs))


def grouped_bar_chart_svg(labels, series, *, title: str = "", y_label: str = "") -> str:
    """Two-or-more series side by side per label; series = [(name, values, color)]."""
    n_series = len(series)
    sub_w = max(14, _BAR_W // n_series)
    group_w = sub_w * n_series
    labels = list(labels)
    numeric = [v for _, vals, _ in series for v in vals if v is not None]
    lo = min(0.0, min(numeric, default=0.0))
    hi = max(0.0, max(numeric, default=1.0))
    if hi == lo:
        hi = lo + 1.0
    span = hi - lo
    width = _MARGIN_L + len(labels) * (group_w + _GAP) + _GAP
    height = _MARGIN_T + _PLOT_H + _MARGIN_B
    y_of = lambda v: _MARGIN_T + (hi - v) / span * _PLOT_H
    zero_y = y_of(0.0)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
            f'font-size="14">{escape(title)}</text>'
        )
    if y_label:
        out.append(
            f'<text x="14" y="{_MARGIN_T + _PLOT_H / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 14 {_MARGIN_T + _PLOT_H / 2:.1f})">'
            f"{escape(y_label)}</text>"
        )
    out.append(
        f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}" '
        f'y2="{_MARGIN_T + _PLOT_H}" stroke="black"/>'
    )
    out.append(
        f'<line x1="{_MARGIN_L}" y1="{zero_y:.1f}" '
        f'x2="{width - _GAP}" y2="{zero_y:.1f}" stroke="black"/>'
    )
    for j, (name, _, color) in enumerate(series):
        lx = _MARGIN_L + 10 + j * 130
        out.append(f'<rect x="{lx}" y="{height - 18}" width="12" height="12" fill="{color}"/>')
        out.append(f'<text x="{lx + 16}" y="{height - 8}">{escape(name)}</text>')
    for i, label in enumerate(labels):
        gx = _MARGIN_L + _GAP + i * (group_w + _GAP)
        for j, (_, vals, color) in enumerate(series):
            value = vals[i]
            if value is None:
                continue
            x = gx + j * sub_w
            top = y_of(max(value, 0.0))
            h = abs(y_of(value) - zero_y)
            out.append(
                f'<rect x="{x}" y="{top:.1f}" width="{sub_w - 2}" height="{h:.1f}" '
                f'fill="{color}"/>'
            )
        out.append(
            f'<text x="{gx + group_w / 2:.1f}" y="{_MARGIN_T + _PLOT_H + 16}" '
            f'text-anchor="middle">{escape(str(label))}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
