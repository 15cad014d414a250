"""Deterministic SVG heatmaps and CSV tables for attribution results."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

CELL = 60


def diverging_color(value: float, scale: float) -> str:
    """Blue for negative, white at zero, red for positive."""
    t = 0.0 if scale <= 0 else max(-1.0, min(1.0, value / scale))
    if t >= 0:
        r, g, b = 255, round(255 * (1 - t)), round(255 * (1 - t))
    else:
        r, g, b = round(255 * (1 + t)), round(255 * (1 + t)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def _heatmap_group(values, x0, y0, scale, label=None) -> list[str]:
    out = []
    for i, v in enumerate(values):
        row, col = divmod(i, 2)
        x, y = x0 + col * CELL, y0 + row * CELL
        out.append(
            f'<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" '
            f'fill="{diverging_color(v, scale)}" stroke="#333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{x + CELL / 2:g}" y="{y + CELL / 2 + 4:g}" font-size="12" '
            f'text-anchor="middle" font-family="monospace">{v:.3f}</text>'
        )
    if label:
        out.append(
            f'<text x="{x0 + CELL:g}" y="{y0 + 2 * CELL + 14:g}" font-size="11" '
            f'text-anchor="middle" font-family="sans-serif">{escape(label)}</text>'
        )
    return out


def heatmap_svg(values, caption: str, scale: float | None = None) -> str:
    """A 2x2 signed heatmap of four pixel attributions."""
    values = [float(v) for v in np.asarray(values, float).ravel()]
    if len(values) != 4:
        raise ValueError("a 2x2 heatmap needs exactly four values")
    scale = max(abs(v) for v in values) if scale is None else scale
    w, h = 2 * CELL + 20, 2 * CELL + 40
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<text x="10" y="14" font-size="11" font-family="sans-serif">{escape(caption)}</text>',
    ]
    parts += _heatmap_group(values, 10, 20, scale)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def grid_svg(cells: dict, rows: list[str], cols: list[str], images: int, caption: str) -> str:
    """Composite figure: one row per noise tier, one column per method.

    ``cells[(row, col)]`` is a list of per-image value vectors (or ``None``
    for a failed cell). Each cell shows one 2x2 heatmap per image, sharing a
    colour scale within the cell.
    """
    pad, head, side = 16, 40, 150
    cell_w = images * (2 * CELL + pad)
    cell_h = 2 * CELL + 36
    w = side + len(cols) * (cell_w + pad)
    h = head + len(rows) * (cell_h + pad) + 20
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<text x="10" y="18" font-size="13" font-family="sans-serif">{escape(caption)}</text>',
    ]
    for j, col in enumerate(cols):
        x = side + j * (cell_w + pad) + cell_w / 2
        parts.append(f'<text x="{x:g}" y="{head - 6}" font-size="13" text-anchor="middle" '
                     f'font-family="sans-serif">{escape(col)}</text>')
    for i, row in enumerate(rows):
        y = head + i * (cell_h + pad)
        parts.append(f'<text x="10" y="{y + CELL:g}" font-size="12" font-family="sans-serif">{escape(row)}</text>')
        for j, col in enumerate(cols):
            x = side + j * (cell_w + pad)
            vals = cells.get((row, col))
            if vals is None:
                parts.append(f'<text x="{x + 10}" y="{y + CELL:g}" font-size="12" fill="#a00" '
                             f'font-family="sans-serif">failed</text>')
                continue
            scale = max((abs(float(v)) for vec in vals for v in vec), default=0.0)
            for k, vec in enumerate(vals):
                parts += _heatmap_group(vec, x + k * (2 * CELL + pad), y, scale, label=f"image {k}")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def rows_to_csv(header, rows, preamble=()) -> str:
    buf = io.StringIO()
    for line in preamble:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def atomic_write(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
