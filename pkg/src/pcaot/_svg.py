"""Minimal deterministic SVG bar charts for campaign reports.

Hand-emitted markup so identical inputs always produce identical bytes; no
timestamps, no generated ids, fixed float formatting.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

PALETTE = ("#4878a8", "#e49444", "#5cab7d", "#d1605e", "#8a7eb5", "#937860")

_CHART_HEIGHT = 300
_MARGIN_LEFT = 64
_MARGIN_RIGHT = 24
_MARGIN_TOP = 48
_MARGIN_BOTTOM = 72
_BAR_WIDTH = 34
_BAR_GAP = 8
_GROUP_GAP = 30


def _fmt(value: float) -> str:
    return f"{value:.4f}".rstrip("0").rstrip(".") or "0"


def _nice_ceiling(value: float) -> float:
    if value <= 0:
        return 1.0
    scaled = value
    power = 0
    while scaled > 10:
        scaled /= 10
        power += 1
    while scaled <= 1:
        scaled *= 10
        power -= 1
    for step in (1.0, 2.0, 2.5, 5.0, 10.0):
        if scaled <= step:
            return step * 10**power
    return 10.0 * 10**power


def grouped_bar_chart(
    title: str,
    ylabel: str,
    groups: list[str],
    series: list[tuple[str, list[float | None]]],
) -> str:
    """Render one grouped bar chart; series values align with groups.

    None values draw no bar.  Output is a complete standalone SVG document.
    """
    nseries = max(len(series), 1)
    group_width = nseries * _BAR_WIDTH + (nseries - 1) * _BAR_GAP
    plot_width = max(
        len(groups) * (group_width + _GROUP_GAP), group_width + _GROUP_GAP, 200
    )
    width = _MARGIN_LEFT + plot_width + _MARGIN_RIGHT
    height = _MARGIN_TOP + _CHART_HEIGHT + _MARGIN_BOTTOM
    values = [v for _, vals in series for v in vals if v is not None]
    ymax = _nice_ceiling(max(values) if values else 1.0)

    def ypix(value: float) -> float:
        return _MARGIN_TOP + _CHART_HEIGHT * (1.0 - value / ymax)

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">'
    )
    parts.append(f'<rect width="{width}" height="{height}" fill="#ffffff"/>')
    parts.append(
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-size="15" '
        f'fill="#222222">{escape(title)}</text>'
    )
    parts.append(
        f'<text x="16" y="{_MARGIN_TOP + _CHART_HEIGHT / 2:.1f}" text-anchor="middle" '
        f'font-size="12" fill="#444444" transform="rotate(-90 16 '
        f'{_MARGIN_TOP + _CHART_HEIGHT / 2:.1f})">{escape(ylabel)}</text>'
    )
    for tick in range(5):
        value = ymax * tick / 4
        y = ypix(value)
        parts.append(
            f'<line x1="{_MARGIN_LEFT}" y1="{y:.1f}" x2="{width - _MARGIN_RIGHT}" '
            f'y2="{y:.1f}" stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_LEFT - 6}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-size="11" fill="#444444">{_fmt(value)}</text>'
        )
    for gi, group in enumerate(groups):
        gx = _MARGIN_LEFT + _GROUP_GAP / 2 + gi * (group_width + _GROUP_GAP)
        for si, (_, vals) in enumerate(series):
            value = vals[gi] if gi < len(vals) else None
            if value is None:
                continue
            x = gx + si * (_BAR_WIDTH + _BAR_GAP)
            y = ypix(value)
            bar_height = _MARGIN_TOP + _CHART_HEIGHT - y
            color = PALETTE[si % len(PALETTE)]
            parts.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{_BAR_WIDTH}" '
                f'height="{bar_height:.1f}" fill="{color}"/>'
            )
            parts.append(
                f'<text x="{x + _BAR_WIDTH / 2:.1f}" y="{y - 4:.1f}" text-anchor="middle" '
                f'font-size="10" fill="#333333">{_fmt(value)}</text>'
            )
        parts.append(
            f'<text x="{gx + group_width / 2:.1f}" y="{_MARGIN_TOP + _CHART_HEIGHT + 18}" '
            f'text-anchor="middle" font-size="11" fill="#222222">{escape(group)}</text>'
        )
    legend_y = _MARGIN_TOP + _CHART_HEIGHT + 40
    legend_x = float(_MARGIN_LEFT)
    for si, (label, _) in enumerate(series):
        color = PALETTE[si % len(PALETTE)]
        parts.append(
            f'<rect x="{legend_x:.1f}" y="{legend_y - 10}" width="12" height="12" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{legend_x + 16:.1f}" y="{legend_y}" font-size="11" '
            f'fill="#222222">{escape(label)}</text>'
        )
        legend_x += 16 + 7 * len(label) + 24
    parts.append(
        f'<line x1="{_MARGIN_LEFT}" y1="{_MARGIN_TOP + _CHART_HEIGHT}" '
        f'x2="{width - _MARGIN_RIGHT}" y2="{_MARGIN_TOP + _CHART_HEIGHT}" '
        f'stroke="#222222" stroke-width="1"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
