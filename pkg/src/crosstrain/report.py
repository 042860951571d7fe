"""CSV and SVG output for sweep tables and cost surfaces.

CSV follows RFC 4180 (CRLF line ends, minimal quoting) with floats written
by ``repr`` so values round-trip exactly. SVG charts are drawn with
matplotlib using a fixed hash salt and no date metadata, so identical tables
give identical bytes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .sweep import COST_OUTPUTS, Normalization, SweepTable

_SVG_RC = {
    "svg.hashsalt": "crosstrain",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "font.size": 9.0,
}


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "item") and not isinstance(v, str):
        return _cell(v.item())
    return str(v)


def csv_text(columns: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _write(path: Path, data: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def emit_csv(table: SweepTable, path: str | Path) -> Path:
    return _write(Path(path), csv_text(table.columns, table.rows))


@dataclass(frozen=True)
class PlotStyle:
    """Which columns to draw and how to label the chart.

    ``columns=None`` picks the cost ratios of a normalized sweep, or the raw
    cost columns otherwise.
    """

    columns: tuple[str, ...] | None = None
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None
    width: float = 6.4
    height: float = 4.0


def _default_columns(table: SweepTable) -> tuple[str, ...]:
    ratio = tuple(c for c in table.columns if c.endswith("_ratio"))
    if ratio:
        return ratio
    return tuple(c for c in COST_OUTPUTS if c in table.columns)


def emit_svg(table: SweepTable, path: str | Path, style: PlotStyle = PlotStyle()) -> Path:
    """Line chart of ``style.columns`` against the first (axis) column.

    Each series is a ``<g id="series-<column>">`` group holding one path with
    a vertex per row.
    """
    cols = style.columns or _default_columns(table)
    x = table.column(table.columns[0])
    with matplotlib.rc_context(_SVG_RC):
        fig = Figure(figsize=(style.width, style.height))
        FigureCanvasSVG(fig)
        ax = fig.add_subplot()
        for c in cols:
            (line,) = ax.plot(x, table.column(c), marker="o", markersize=3, label=c)
            line.set_gid(f"series-{c}")
        ax.set_xlabel(style.xlabel or table.columns[0])
        if style.ylabel:
            ax.set_ylabel(style.ylabel)
        elif table.spec is not None and table.spec.normalization is not Normalization.NONE:
            ax.set_ylabel(f"cost ratio ({table.spec.normalization.value})")
        else:
            ax.set_ylabel("cost")
        title = style.title if style.title is not None else table.title
        if title:
            ax.set_title(title)
        if cols:
            ax.legend(loc="best")
        ax.grid(True, linewidth=0.4, alpha=0.5)
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    return _write(Path(path), buf.getvalue())


def surface_csv(report, path: str | Path) -> Path:
    """Long-format cost surface: one row per lattice point."""
    rows = [(float(a), float(g), float(report.cost_surface[i, j]))
            for i, a in enumerate(report.grid_alpha)
            for j, g in enumerate(report.grid_gamma)]
    return _write(Path(path), csv_text(("x1_alpha", "x1_gamma", "total"), rows))
