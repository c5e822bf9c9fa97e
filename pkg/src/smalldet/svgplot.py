"""Hand-emitted SVG charts for study reports: no rasterization dependency."""

from __future__ import annotations

import math

from .sim import SimReport

__all__ = ["bar_chart_svg", "pie_chart_svg"]

_COLORS = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860")


def _esc(text: str) -> str:
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def bar_chart_svg(report: SimReport) -> str:
    """Grouped bars: mean positives per ground truth, per bin, per assigner."""
    bins = report.bin_labels
    series = [(a.name, a.mean_positives_per_gt_per_bin) for a in report.assigners]
    width, height = 640, 360
    left, right, top, bottom = 60, 20, 40, 60
    plot_w = width - left - right
    plot_h = height - top - bottom
    vmax = max((max(vals) for _, vals in series), default=0.0) or 1.0
    group_w = plot_w / max(len(bins), 1)
    bar_w = group_w * 0.8 / max(len(series), 1)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">Mean positives per ground truth</text>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" '
        f'y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = top + plot_h * (1 - frac)
        parts.append(
            f'<text x="{left - 6}" y="{y + 4}" text-anchor="end" font-size="10" '
            f'font-family="sans-serif">{vmax * frac:.2f}</text>'
        )
        parts.append(
            f'<line x1="{left - 3}" y1="{y}" x2="{left}" y2="{y}" stroke="black"/>'
        )
    for bi, label in enumerate(bins):
        gx = left + bi * group_w
        for si, (_, vals) in enumerate(series):
            v = vals[bi]
            h = plot_h * (v / vmax)
            x = gx + group_w * 0.1 + si * bar_w
            y = top + plot_h - h
            parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" '
                f'height="{h:.2f}" fill="{_COLORS[si % len(_COLORS)]}"/>'
            )
        parts.append(
            f'<text x="{gx + group_w / 2:.2f}" y="{top + plot_h + 16}" '
            f'text-anchor="middle" font-size="11" font-family="sans-serif">'
            f"{_esc(label)}</text>"
        )
    for si, (name, _) in enumerate(series):
        lx = left + si * (plot_w / max(len(series), 1))
        ly = height - 18
        parts.append(
            f'<rect x="{lx:.2f}" y="{ly - 9}" width="10" height="10" '
            f'fill="{_COLORS[si % len(_COLORS)]}"/>'
        )
        parts.append(
            f'<text x="{lx + 14:.2f}" y="{ly}" font-size="10" '
            f'font-family="sans-serif">{_esc(name)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _pie(cx: float, cy: float, r: float, shares: list[float], labels: list[str],
         title: str) -> list[str]:
    parts = [
        f'<text x="{cx}" y="{cy - r - 10}" text-anchor="middle" font-size="12" '
        f'font-family="sans-serif">{_esc(title)}</text>'
    ]
    total = sum(shares)
    if total <= 0:
        parts.append(
            f'<circle cx="{cx}" cy="{cy}" r="{r}" fill="none" stroke="black"/>'
        )
        parts.append(
            f'<text x="{cx}" y="{cy}" text-anchor="middle" font-size="10" '
            f'font-family="sans-serif">no positives</text>'
        )
        return parts
    angle = -math.pi / 2
    for k, share in enumerate(shares):
        frac = share / total
        if frac <= 0:
            continue
        a0, a1 = angle, angle + 2 * math.pi * frac
        angle = a1
        x0, y0 = cx + r * math.cos(a0), cy + r * math.sin(a0)
        x1, y1 = cx + r * math.cos(a1), cy + r * math.sin(a1)
        large = 1 if (a1 - a0) > math.pi else 0
        if frac >= 1.0:
            parts.append(
                f'<circle cx="{cx}" cy="{cy}" r="{r}" '
                f'fill="{_COLORS[k % len(_COLORS)]}"/>'
            )
        else:
            parts.append(
                f'<path d="M {cx:.2f} {cy:.2f} L {x0:.2f} {y0:.2f} '
                f'A {r} {r} 0 {large} 1 {x1:.2f} {y1:.2f} Z" '
                f'fill="{_COLORS[k % len(_COLORS)]}"/>'
            )
        mid = (a0 + a1) / 2
        lx = cx + (r + 16) * math.cos(mid)
        ly = cy + (r + 16) * math.sin(mid)
        parts.append(
            f'<text x="{lx:.2f}" y="{ly:.2f}" text-anchor="middle" font-size="9" '
            f'font-family="sans-serif">{_esc(labels[k])} {share:.1f}%</text>'
        )
    return parts


def pie_chart_svg(report: SimReport) -> str:
    """One pie per assigner: share of positives per size bin."""
    n = max(len(report.assigners), 1)
    width, height = 220 * n, 260
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for i, stats in enumerate(report.assigners):
        parts.extend(
            _pie(
                110 + 220 * i,
                140,
                70,
                stats.share_pct_per_bin,
                list(report.bin_labels),
                stats.name,
            )
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
