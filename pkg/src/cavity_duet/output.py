"""CSV and SVG writers for observable series and coefficient tables."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytic import ProductEvolution
from .errors import OutputError, ValidationError
from .observables import ObservableSeries

CSV_COLUMNS = (
    "tau", "n1_A", "n1_N", "n2_A", "n2_N", "sz1_A", "sz1_N", "sz2_A", "sz2_N",
    "m1_A", "m1_N", "m2_A", "m2_N", "mtot_A", "mtot_N", "d_n1", "d_n2", "d_sz1", "d_sz2",
)


def _column(series: ObservableSeries, name: str) -> np.ndarray:
    if name == "tau":
        return series.tau
    if name.startswith("d_"):
        return series.diff[name[2:]]
    key, path = name.rsplit("_", 1)
    return (series.analytic if path == "A" else series.numeric)[key]


def _write_text(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def emit_csv(series: ObservableSeries, path) -> Path:
    """Header plus one row per grid point; floats use repr, which round-trips exactly."""
    cols = [_column(series, c) for c in CSV_COLUMNS]
    lines = [",".join(CSV_COLUMNS)]
    for i in range(series.tau.size):
        lines.append(",".join(repr(float(c[i])) for c in cols))
    return _write_text(path, "\n".join(lines) + "\n")


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def emit_coeffs(evolution: ProductEvolution, path) -> Path:
    """tau, Re/Im of g1..g3, then Re/Im of (bz, bp, bm) for every (cavity, m) ladder."""
    header = ["tau"]
    cols = [evolution.tau_grid]
    for i in range(3):
        header += [f"g{i + 1}_re", f"g{i + 1}_im"]
        cols += [evolution.gamma[:, i].real, evolution.gamma[:, i].imag]
    for (cavity, m), b in sorted(evolution.betas.items()):
        for j, name in enumerate(("bz", "bp", "bm")):
            header += [f"c{cavity}m{m}_{name}_re", f"c{cavity}m{m}_{name}_im"]
            cols += [b[:, j].real, b[:, j].imag]
    lines = [",".join(header)]
    for i in range(evolution.tau_grid.size):
        lines.append(",".join(repr(float(c[i])) for c in cols))
    return _write_text(path, "\n".join(lines) + "\n")


# --- SVG ---------------------------------------------------------------------

COLORS = ("#1f77b4", "#2ca02c", "#e6ac00", "#d62728", "#9467bd", "#8c564b")


@dataclass(frozen=True)
class Line:
    column: str      # CSV column name, e.g. "n1_A" or "d_sz1"
    label: str
    color: str
    dashed: bool = False


@dataclass(frozen=True)
class Panel:
    title: str
    lines: tuple[Line, ...]


def _lines(*spec) -> tuple[Line, ...]:
    return tuple(Line(*s) for s in spec)


PANEL_LAYOUTS = {
    "fig1": (1, (
        Panel("analytic", _lines(("n1_A", "<n1>", COLORS[0]), ("sz1_A", "<sz1>", COLORS[2]),
                                 ("m1_A", "<M1>", COLORS[1]))),
        Panel("analytic - numeric", _lines(("d_n1", "d<n1>", COLORS[0]), ("d_sz1", "d<sz1>", COLORS[2]))),
    )),
    "fig2": (2, (
        Panel("(a) photon numbers", _lines(("n1_A", "<n1>", COLORS[0]), ("n2_A", "<n2>", COLORS[1]))),
        Panel("(b) excitations", _lines(("m1_A", "<M1>", COLORS[0]), ("m2_A", "<M2>", COLORS[1]),
                                        ("mtot_A", "<M>", COLORS[2]))),
        Panel("(c) photon-number difference", _lines(("d_n1", "d<n1>", COLORS[0]), ("d_n2", "d<n2>", COLORS[1]))),
        Panel("(d) excitation difference", _lines(("d_m1", "d<M1>", COLORS[0]), ("d_m2", "d<M2>", COLORS[1]))),
    )),
    "fig3": (2, (
        Panel("photon numbers", _lines(("n1_A", "<n1> A", COLORS[0]), ("n1_N", "<n1> N", COLORS[0], True),
                                       ("n2_A", "<n2> A", COLORS[1]), ("n2_N", "<n2> N", COLORS[1], True))),
        Panel("atomic inversion", _lines(("sz1_A", "<sz1> A", COLORS[0]), ("sz1_N", "<sz1> N", COLORS[0], True),
                                         ("sz2_A", "<sz2> A", COLORS[1]), ("sz2_N", "<sz2> N", COLORS[1], True))),
        Panel("photon-number difference", _lines(("d_n1", "cavity 1", COLORS[0]), ("d_n2", "cavity 2", COLORS[1]))),
        Panel("inversion difference", _lines(("d_sz1", "cavity 1", COLORS[0]), ("d_sz2", "cavity 2", COLORS[1]))),
    )),
}
PANEL_LAYOUTS["run"] = (2, (
    PANEL_LAYOUTS["fig3"][1][0],
    PANEL_LAYOUTS["fig3"][1][1],
    Panel("analytic - numeric", _lines(("d_n1", "d<n1>", COLORS[0]), ("d_n2", "d<n2>", COLORS[1]),
                                       ("d_sz1", "d<sz1>", COLORS[2]), ("d_sz2", "d<sz2>", COLORS[3]))),
))

PANEL_W, PANEL_H = 460, 300
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 62, 16, 30, 40


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.6g}"


def _panel_svg(series: ObservableSeries, panel: Panel, x0: float, y0: float) -> list[str]:
    tau = series.tau
    data = [_column(series, ln.column) for ln in panel.lines]
    lo = min(float(np.min(d)) for d in data)
    hi = max(float(np.max(d)) for d in data)
    if hi - lo < 1e-12:
        pad = max(abs(hi), 1.0) * 0.05
        lo, hi = lo - pad, hi + pad
    else:
        pad = 0.05 * (hi - lo)
        lo, hi = lo - pad, hi + pad
    t0, t1 = float(tau[0]), float(tau[-1]) if tau[-1] > tau[0] else float(tau[0]) + 1.0
    pw = PANEL_W - MARGIN_L - MARGIN_R
    ph = PANEL_H - MARGIN_T - MARGIN_B
    left, top = x0 + MARGIN_L, y0 + MARGIN_T

    def sx(t):
        return left + (t - t0) / (t1 - t0) * pw

    def sy(v):
        return top + (hi - v) / (hi - lo) * ph

    out = ['<g class="panel">',
           f'<text x="{_fmt(left + pw / 2)}" y="{_fmt(y0 + 18)}" text-anchor="middle" '
           f'font-size="13">{_escape(panel.title)}</text>',
           f'<rect x="{_fmt(left)}" y="{_fmt(top)}" width="{_fmt(pw)}" height="{_fmt(ph)}" '
           f'fill="none" stroke="#000" stroke-width="1"/>']
    for v in _nice_ticks(lo, hi):
        y = sy(v)
        out.append(f'<line x1="{_fmt(left - 4)}" y1="{_fmt(y)}" x2="{_fmt(left)}" y2="{_fmt(y)}" stroke="#000"/>')
        out.append(f'<text x="{_fmt(left - 6)}" y="{_fmt(y + 4)}" text-anchor="end" font-size="10">'
                   f'{_tick_label(v)}</text>')
    for v in _nice_ticks(t0, t1):
        x = sx(v)
        out.append(f'<line x1="{_fmt(x)}" y1="{_fmt(top + ph)}" x2="{_fmt(x)}" y2="{_fmt(top + ph + 4)}" stroke="#000"/>')
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(top + ph + 16)}" text-anchor="middle" font-size="10">'
                   f'{_tick_label(v)}</text>')
    out.append(f'<text x="{_fmt(left + pw / 2)}" y="{_fmt(top + ph + 32)}" text-anchor="middle" '
               f'font-size="11">t / T1</text>')
    for k, (ln, d) in enumerate(zip(panel.lines, data)):
        pts = " ".join(f"{_fmt(sx(t))},{_fmt(sy(v))}" for t, v in zip(tau, d))
        dash = ' stroke-dasharray="5,3"' if ln.dashed else ""
        out.append(f'<polyline fill="none" stroke="{ln.color}" stroke-width="1.2"{dash} points="{pts}"/>')
        lx, ly = left + 8 + 92 * (k % 4), top + 12 + 12 * (k // 4)
        out.append(f'<line x1="{_fmt(lx)}" y1="{_fmt(ly - 3)}" x2="{_fmt(lx + 14)}" y2="{_fmt(ly - 3)}" '
                   f'stroke="{ln.color}"{dash}/>')
        out.append(f'<text x="{_fmt(lx + 18)}" y="{_fmt(ly)}" font-size="10">{_escape(ln.label)}</text>')
    out.append("</g>")
    return out


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(series: ObservableSeries, layout: str | tuple = "run") -> str:
    if isinstance(layout, str):
        if layout not in PANEL_LAYOUTS:
            raise ValidationError(f"unknown panel layout {layout!r}")
        layout = PANEL_LAYOUTS[layout]
    ncols, panels = layout
    nrows = math.ceil(len(panels) / ncols)
    width, height = ncols * PANEL_W, nrows * PANEL_H
    body = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
            f'<rect width="{width}" height="{height}" fill="#fff"/>']
    for i, panel in enumerate(panels):
        body += _panel_svg(series, panel, (i % ncols) * PANEL_W, (i // ncols) * PANEL_H)
    body.append("</svg>")
    return "\n".join(body) + "\n"


def emit_svg(series: ObservableSeries, path, layout: str | tuple = "run") -> Path:
    return _write_text(path, render_svg(series, layout))
