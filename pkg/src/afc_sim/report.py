"""Plain-text result reports and minimal dependency-free SVG line plots."""

from __future__ import annotations

import json
import math
import os
from typing import Sequence


def write_svg_lines(
    path,
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    x_label: str = "",
    y_label: str = "",
    width: int = 640,
    height: int = 400,
) -> None:
    """Polyline plot of (label, x, y) series with plain axes."""
    pad = 54
    xs = [x for _, sx, _ in series for x in sx]
    ys = [y for _, _, sy in series for y in sy]
    if not xs:
        raise ValueError("nothing to plot")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        parts.append(
            f'<text x="{sx(xv):.1f}" y="{height - pad + 18}" font-size="11" '
            f'text-anchor="middle">{xv:.4g}</text>'
        )
        parts.append(
            f'<text x="{pad - 6}" y="{sy(yv):.1f}" font-size="11" '
            f'text-anchor="end" dominant-baseline="middle">{yv:.4g}</text>'
        )
    if x_label:
        parts.append(
            f'<text x="{width / 2:.0f}" y="{height - 12}" font-size="12" text-anchor="middle">{x_label}</text>'
        )
    if y_label:
        parts.append(
            f'<text x="16" y="{height / 2:.0f}" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 16 {height / 2:.0f})">{y_label}</text>'
        )
    for i, (label, series_x, series_y) in enumerate(series):
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(series_x, series_y))
        color = colors[i % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if label:
            parts.append(
                f'<text x="{width - pad}" y="{pad + 14 * i}" font-size="11" '
                f'text-anchor="end" fill="{color}">{label}</text>'
            )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def write_result_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.4g}"
    return str(x)


def render_table(headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [[_fmt(c) for c in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h) for i, h in enumerate(headers)]
    line = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    sep = "  ".join("-" * w for w in widths)
    body = "\n".join("  ".join(r[i].ljust(widths[i]) for i in range(len(headers))) for r in cells)
    return "\n".join([line, sep, body]) if cells else "\n".join([line, sep])


def summarize_results(result_dirs: Sequence[str]) -> str:
    """Tabulate result.json files: simulated vs analytic efficiencies and checks."""
    rows = []
    check_lines = []
    for d in result_dirs:
        path = os.path.join(d, "result.json")
        if not os.path.exists(path):
            continue
        with open(path) as fh:
            res = json.load(fh)
        effs = res.get("efficiencies", [])
        analytic = res.get("analytic", {})
        rows.append(
            [
                res.get("scenario", "?"),
                res.get("inputs", {}).get("preset", "?"),
                sum(effs) / len(effs) if effs else None,
                analytic.get("eta"),
                len(effs),
            ]
        )
        for name, value in sorted(res.get("checks", {}).items()):
            check_lines.append(f"  {d}: {name} = {_fmt(value)}")
    if not rows:
        return "no results found\n"
    table = render_table(
        ["scenario", "preset", "mean_efficiency", "analytic_eta", "n_windows"], rows
    )
    out = [table]
    if check_lines:
        out.append("\nchecks:")
        out.extend(check_lines)
    return "\n".join(out) + "\n"
