"""CSV and SVG rendering for analysis results.

Everything here is rendered by hand into text: CSV rows carry full float
precision (repr), and the SVG is a fixed grid of panels with no external
assets, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .analysis import AnalysisSeries, PcaResult
from .errors import OutputUnwritableError

PANEL_W = 640
PANEL_H = 480
MARGIN_L = 72
MARGIN_R = 24
MARGIN_T = 48
MARGIN_B = 56

_SERIES_TITLES = {
    "RMSD": "backbone deviation vs time",
    "RMSF": "per-atom fluctuation",
    "RoG": "radius of gyration vs time",
}


def series_csv(series: AnalysisSeries) -> str:
    lines = [f"x_{series.x_unit},y_nm"]
    for x, y in series.values:
        lines.append(f"{x!r},{y!r}")
    return "\n".join(lines) + "\n"


def pca_csv(result: PcaResult) -> str:
    """First two principal projections per frame, one row per frame."""
    lines = ["pc1_nm,pc2_nm"]
    ncomp = result.projections.shape[1]
    for row in result.projections:
        pc1 = float(row[0]) if ncomp >= 1 else 0.0
        pc2 = float(row[1]) if ncomp >= 2 else 0.0
        lines.append(f"{pc1!r},{pc2!r}")
    return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return f"{v:g}"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


@dataclass(frozen=True)
class _Panel:
    title: str
    x_label: str
    y_label: str
    kind: str  # "line" | "scatter" | "bars"
    points: tuple  # of (x, y)


def _panel_svg(panel: _Panel, ox: int, oy: int) -> list[str]:
    """Render one panel at grid offset (ox, oy)."""
    plot_w = PANEL_W - MARGIN_L - MARGIN_R
    plot_h = PANEL_H - MARGIN_T - MARGIN_B
    left = ox + MARGIN_L
    top = oy + MARGIN_T

    xs = [p[0] for p in panel.points]
    ys = [p[1] for p in panel.points]
    xmin, xmax = (min(xs), max(xs)) if xs else (0.0, 1.0)
    ymin, ymax = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if xmax <= xmin:
        xmin, xmax = xmin - 0.5, xmax + 0.5
    if ymax <= ymin:
        ymin, ymax = ymin - 0.5, ymax + 0.5
    # breathing room so extreme points do not sit on the frame
    ypad = (ymax - ymin) * 0.05
    ymin -= ypad
    ymax += ypad

    def px(x: float) -> float:
        return left + (x - xmin) / (xmax - xmin) * plot_w

    def py(y: float) -> float:
        return top + plot_h - (y - ymin) / (ymax - ymin) * plot_h

    out = []
    out.append(
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" '
        'fill="white" stroke="#333333" stroke-width="1"/>'
    )
    out.append(
        f'<text x="{ox + PANEL_W // 2}" y="{oy + 26}" text-anchor="middle" '
        f'font-size="16" fill="#111111">{panel.title}</text>'
    )

    for tx in _ticks(xmin, xmax):
        x = px(tx)
        out.append(
            f'<line x1="{x:.2f}" y1="{top + plot_h}" x2="{x:.2f}" '
            f'y2="{top + plot_h + 5}" stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{x:.2f}" y="{top + plot_h + 20}" text-anchor="middle" '
            f'font-size="11" fill="#333333">{_fmt(tx)}</text>'
        )
    for ty in _ticks(ymin, ymax):
        y = py(ty)
        out.append(
            f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" '
            'stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-size="11" fill="#333333">{_fmt(ty)}</text>'
        )

    out.append(
        f'<text x="{ox + PANEL_W // 2}" y="{oy + PANEL_H - 12}" '
        f'text-anchor="middle" font-size="13" fill="#111111">{panel.x_label}</text>'
    )
    out.append(
        f'<text x="{ox + 18}" y="{top + plot_h // 2}" text-anchor="middle" '
        f'font-size="13" fill="#111111" '
        f'transform="rotate(-90 {ox + 18} {top + plot_h // 2})">{panel.y_label}</text>'
    )

    if panel.kind == "line" and panel.points:
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in panel.points)
        out.append(
            f'<polyline points="{coords}" fill="none" stroke="#1f5fa8" '
            'stroke-width="1.5"/>'
        )
    elif panel.kind == "scatter":
        for x, y in panel.points:
            out.append(
                f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" '
                'fill="#1f5fa8" fill-opacity="0.7"/>'
            )
    elif panel.kind == "bars":
        n = len(panel.points)
        bar_w = plot_w / max(1, n) * 0.7
        for x, y in panel.points:
            bx = px(x) - bar_w / 2
            by = py(y)
            out.append(
                f'<rect x="{bx:.2f}" y="{by:.2f}" width="{bar_w:.2f}" '
                f'height="{top + plot_h - by:.2f}" fill="#1f5fa8"/>'
            )
    return out


def render_svg(series=(), pca_result: PcaResult | None = None, title: str = "") -> str:
    """One SVG document with a near-square grid of panels."""
    panels: list[_Panel] = []
    for s in series:
        panels.append(
            _Panel(
                title=_SERIES_TITLES.get(s.method, s.method),
                x_label=s.x_label,
                y_label=f"{s.method} (nm)",
                kind="line",
                points=tuple(s.values),
            )
        )
    if pca_result is not None:
        ncomp = pca_result.projections.shape[1]
        scatter = tuple(
            (
                float(row[0]) if ncomp >= 1 else 0.0,
                float(row[1]) if ncomp >= 2 else 0.0,
            )
            for row in pca_result.projections
        )
        panels.append(
            _Panel(
                title="principal components 1 and 2",
                x_label="PC1 (nm)",
                y_label="PC2 (nm)",
                kind="scatter",
                points=scatter,
            )
        )
        total = float(pca_result.eigenvalues.sum())
        shown = pca_result.eigenvalues[: min(10, len(pca_result.eigenvalues))]
        bars = tuple(
            (float(i + 1), float(v) / total if total > 0 else 0.0)
            for i, v in enumerate(shown)
        )
        panels.append(
            _Panel(
                title="variance captured per component",
                x_label="component",
                y_label="fraction",
                kind="bars",
                points=bars,
            )
        )

    if not panels:
        raise ValueError("nothing to plot")

    banner = 44 if title else 0
    cols = math.ceil(math.sqrt(len(panels)))
    rows = math.ceil(len(panels) / cols)
    width = cols * PANEL_W
    height = rows * PANEL_H + banner

    body = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}" '
        'font-family="sans-serif">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        body.append(
            f'<text x="{width // 2}" y="30" text-anchor="middle" '
            f'font-size="20" fill="#111111">{_escape(title)}</text>'
        )
    for i, panel in enumerate(panels):
        ox = (i % cols) * PANEL_W
        oy = (i // cols) * PANEL_H + banner
        body.extend(_panel_svg(panel, ox, oy))
    body.append("</svg>")
    return "\n".join(body) + "\n"


def emit_plots(
    series=(),
    pca_result: PcaResult | None = None,
    title: str = "",
    out_dir=".",
) -> list:
    """Write one CSV per result plus a combined plots.svg.

    Returns the written paths, CSVs first, SVG last.
    """
    series = tuple(series)
    if not series and pca_result is None:
        raise ValueError("nothing to plot")
    directory = Path(out_dir)
    written = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for s in series:
            path = directory / f"{s.method.lower()}.csv"
            path.write_text(series_csv(s), encoding="utf-8", newline="\n")
            written.append(path)
        if pca_result is not None:
            path = directory / "pca.csv"
            path.write_text(pca_csv(pca_result), encoding="utf-8", newline="\n")
            written.append(path)
        svg_path = directory / "plots.svg"
        svg_path.write_text(
            render_svg(series, pca_result, title), encoding="utf-8", newline="\n"
        )
        written.append(svg_path)
    except OSError as exc:
        raise OutputUnwritableError(f"cannot write plot outputs: {exc}") from exc
    return written
