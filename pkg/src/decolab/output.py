"""Byte-stable CSV tables and a small SVG line-plot writer."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(list(values))

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)


def complex_columns(name: str) -> list[str]:
    return [f"re_{name}", f"im_{name}"]


def render_csv(table: Table, echo: dict) -> str:
    lines = [f"# {k} = {echo[k]}" for k in echo]
    lines.append(",".join(table.columns))
    lines.extend(",".join(fmt(v) for v in row) for row in table.rows)
    return "\n".join(lines) + "\n"


def write_csv(path: Path, table: Table, echo: dict) -> None:
    Path(path).write_bytes(render_csv(table, echo).encode("utf-8"))


_COLORS = ("#1f5fa8", "#c0392b", "#2e8b57", "#8e44ad", "#d68910")


def render_svg(x, series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
               width: int = 640, height: int = 400) -> str:
    """Polylines with a framed axis box, tick labels at the extremes and a legend."""
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    finite = np.concatenate([v[np.isfinite(v)] for v in ys.values()] or [np.zeros(1)])
    y0, y1 = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    x0, x1 = float(x.min()), float(x.max())
    if x1 == x0:
        x1 = x0 + 1.0
    ml, mr, mt, mb = 70, 20, 30, 45
    pw, ph = width - ml - mr, height - mt - mb
    sx = lambda v: ml + (v - x0) / (x1 - x0) * pw  # noqa: E731
    sy = lambda v: mt + (1 - (v - y0) / (y1 - y0)) * ph  # noqa: E731
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
           f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{title}</text>',
           f'<text x="{ml + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">{xlabel}</text>',
           f'<text x="14" y="{mt + ph / 2:.1f}" text-anchor="middle" '
           f'transform="rotate(-90 14 {mt + ph / 2:.1f})">{ylabel}</text>',
           f'<text x="{ml}" y="{mt + ph + 15}" text-anchor="start">{x0:.4g}</text>',
           f'<text x="{ml + pw}" y="{mt + ph + 15}" text-anchor="end">{x1:.4g}</text>',
           f'<text x="{ml - 4}" y="{mt + ph}" text-anchor="end">{y0:.4g}</text>',
           f'<text x="{ml - 4}" y="{mt + 10}" text-anchor="end">{y1:.4g}</text>']
    for n, (name, y) in enumerate(ys.items()):
        ok = np.isfinite(y)
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x[ok], y[ok]))
        color = _COLORS[n % len(_COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{ml + pw - 6}" y="{mt + 16 + 14 * n}" text-anchor="end" fill="{color}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path: Path, *args, **kw) -> None:
    Path(path).write_bytes(render_svg(*args, **kw).encode("utf-8"))
