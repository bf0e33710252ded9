"""Deterministic CSV/JSON/SVG emission.

All numbers are written with 17 significant digits so repeated runs of the
same configuration produce byte-identical files on any platform.
"""

from __future__ import annotations

import json
from pathlib import Path


def format_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int,)):
        return str(v)
    if isinstance(v, float):
        return f"{v:.17g}"
    s = str(v)
    if any(c in s for c in (",", '"', "\n")):
        s = '"' + s.replace('"', '""') + '"'
    return s


def rows_to_csv_bytes(header, rows) -> bytes:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    return ("\n".join(lines) + "\n").encode()


def rows_to_json_bytes(header, rows) -> bytes:
    payload = {
        "columns": list(header),
        "rows": [[v if isinstance(v, (int, str, bool)) else float(v) for v in row] for row in rows],
    }
    return (json.dumps(payload, separators=(",", ":"), sort_keys=True) + "\n").encode()


def write_table(path: Path, header, rows, fmt: str = "csv") -> Path:
    if fmt == "csv":
        data = rows_to_csv_bytes(header, rows)
    elif fmt == "json":
        data = rows_to_json_bytes(header, rows)
        path = path.with_suffix(".json")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return path


def write_svg_polylines(path: Path, curves, width=640, height=480, margin=50) -> Path:
    """Minimal line plot: one polyline per (xs, ys) curve, plus an axis box."""
    xs_all = [x for xs, _ in curves for x in xs]
    ys_all = [y for _, ys in curves for y in ys]
    if not xs_all:
        raise ValueError("nothing to plot")
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all), max(ys_all)
    xr = (x1 - x0) or 1.0
    yr = (y1 - y0) or 1.0

    def px(x):
        return margin + (x - x0) / xr * (width - 2 * margin)

    def py(y):
        return height - margin - (y - y0) / yr * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="black"/>',
        f'<text x="{margin}" y="{height - margin + 20}" font-size="12">{x0:.6g}</text>',
        f'<text x="{width - margin}" y="{height - margin + 20}" font-size="12" '
        f'text-anchor="end">{x1:.6g}</text>',
        f'<text x="{margin - 5}" y="{height - margin}" font-size="12" '
        f'text-anchor="end">{y0:.6g}</text>',
        f'<text x="{margin - 5}" y="{margin + 10}" font-size="12" text-anchor="end">{y1:.6g}</text>',
    ]
    for xs, ys in curves:
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1"/>')
    parts.append("</svg>")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(("\n".join(parts) + "\n").encode())
    return path
