"""Artifact writers: report.json, report.csv and convergence.svg.

JSON numbers are written with 17 significant digits so every float
round-trips exactly; the CSV follows RFC 4180 (CRLF line endings, quoting
only where needed); the plot is a self-contained SVG 1.1 document with
log-log polylines.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import os

from .harness import LemmaReport, RecoveryReport, SweepReport


def _fmt(x: float) -> str:
    if x != x:
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.17g}"


def _json_escape(s: str) -> str:
    out = []
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return '"' + "".join(out) + '"'


def dumps(obj, indent: int = 0) -> str:
    """Minimal JSON emitter with fixed float formatting."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, str):
        return _json_escape(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{_json_escape(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{dumps(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report_to_dict(report) -> dict:
    return dataclasses.asdict(report)


def write_json(path: str, report) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(report_to_dict(report)) + "\n")


SWEEP_CSV_HEADER = [
    "eps", "h", "n_cells", "capped", "err_l2", "err_h1",
    "energy_diffuse", "energy_sharp", "energy_gap", "perimeter",
    "trace_ratio", "solver_iterations", "solver_residual", "wall_time",
    "failure",
]

RECOVERY_CSV_HEADER = ["eps", "n_cells", "energy_diffuse", "energy_sharp", "gap"]

LEMMA_CSV_HEADER = [
    "eps", "w_name", "smeared_surface", "sharp_surface", "d_blend", "d_sharp",
    "c_blend", "c_sharp", "f_blend", "f_sharp", "trace_ratio", "perimeter",
]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt(v)
    if isinstance(v, tuple):
        return "x".join(str(k) for k in v)
    return str(v)


def write_csv(path: str, report) -> None:
    """One row per sweep entry; columns depend on the report kind."""
    if isinstance(report, SweepReport):
        header = SWEEP_CSV_HEADER
        rows = [
            [r.eps, r.h, r.n_cells, r.capped, r.err_l2, r.err_h1,
             r.energy_diffuse, r.energy_sharp, r.energy_gap, r.perimeter,
             r.trace_ratio, r.solver_iterations, r.solver_residual,
             r.wall_time, r.failure]
            for r in report.rows
        ]
    elif isinstance(report, RecoveryReport):
        header = RECOVERY_CSV_HEADER
        rows = [
            [r.eps, r.n_cells, r.energy_diffuse, report.energy_sharp, r.gap]
            for r in report.rows
        ]
    elif isinstance(report, LemmaReport):
        header = LEMMA_CSV_HEADER
        rows = [
            [r.eps, r.w_name, r.smeared_surface, r.sharp_surface, r.d_blend,
             r.d_sharp, r.c_blend, r.c_sharp, r.f_blend, r.f_sharp,
             r.trace_ratio, r.perimeter]
            for r in report.rows
        ]
    else:
        raise TypeError(f"no CSV layout for {type(report).__name__}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


PLOT_W, PLOT_H = 720, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 170, 30, 60
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def curves_for(report) -> dict[str, list[tuple[float, float]]]:
    """Log-log plottable (eps, value) series per report kind; nonpositive
    values are dropped since they live below any log floor."""
    curves: dict[str, list[tuple[float, float]]] = {}

    def put(name, pairs):
        pairs = [(e, v) for e, v in pairs if v is not None and v > 0]
        if pairs:
            curves[name] = pairs

    if isinstance(report, SweepReport):
        ok = [r for r in report.rows if r.failure is None]
        put("L2 error", [(r.eps, r.err_l2) for r in ok])
        put("H1 error", [(r.eps, r.err_h1) for r in ok])
        put("energy gap", [(r.eps, r.energy_gap) for r in ok])
        if not curves:  # reference-free runs: show the smeared perimeter
            put("perimeter", [(r.eps, r.perimeter) for r in ok])
    elif isinstance(report, RecoveryReport):
        put("energy gap", [(r.eps, r.gap) for r in report.rows])
    elif isinstance(report, LemmaReport):
        names = sorted({r.w_name for r in report.rows})
        for name in names:
            put(f"surface gap ({name})",
                [(r.eps, abs(r.smeared_surface - r.sharp_surface))
                 for r in report.rows if r.w_name == name])
    return curves


def _ticks(lo: float, hi: float) -> list[float]:
    lo_e = math.floor(math.log10(lo))
    hi_e = math.ceil(math.log10(hi))
    return [10.0**e for e in range(lo_e, hi_e + 1)]


def write_svg(path: str, report, title: str = "convergence") -> None:
    curves = curves_for(report)
    body = []
    body.append(
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{PLOT_W}" height="{PLOT_H}" viewBox="0 0 {PLOT_W} {PLOT_H}">'
    )
    body.append(f'<rect width="{PLOT_W}" height="{PLOT_H}" fill="white"/>')
    x0, x1 = MARGIN_L, PLOT_W - MARGIN_R
    y0, y1 = PLOT_H - MARGIN_B, MARGIN_T
    body.append(
        f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
        'fill="none" stroke="#333" stroke-width="1"/>'
    )
    body.append(
        f'<text x="{(x0 + x1) / 2:.1f}" y="{PLOT_H - 15}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">eps (log scale)</text>'
    )
    body.append(
        f'<text x="20" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
        'font-family="sans-serif" font-size="14" '
        f'transform="rotate(-90 20 {(y0 + y1) / 2:.1f})">value (log scale)</text>'
    )

    if not curves:
        body.append(
            f'<text x="{(x0 + x1) / 2:.1f}" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
            'font-family="sans-serif" font-size="14">all curves at exactness floor</text>'
        )
    else:
        xs = [e for pairs in curves.values() for e, _ in pairs]
        ys = [v for pairs in curves.values() for _, v in pairs]
        lx0, lx1 = math.log10(min(xs)), math.log10(max(xs))
        ly0, ly1 = math.log10(min(ys)), math.log10(max(ys))
        if lx1 - lx0 < 1e-9:
            lx0, lx1 = lx0 - 0.5, lx1 + 0.5
        if ly1 - ly0 < 1e-9:
            ly0, ly1 = ly0 - 0.5, ly1 + 0.5

        def px(e):
            return x0 + (math.log10(e) - lx0) / (lx1 - lx0) * (x1 - x0)

        def py(v):
            return y0 - (math.log10(v) - ly0) / (ly1 - ly0) * (y0 - y1)

        for t in _ticks(min(xs), max(xs)):
            if lx0 - 1e-9 <= math.log10(t) <= lx1 + 1e-9:
                body.append(
                    f'<line x1="{px(t):.1f}" y1="{y0}" x2="{px(t):.1f}" y2="{y0 + 5}" stroke="#333"/>'
                )
                body.append(
                    f'<text x="{px(t):.1f}" y="{y0 + 20}" text-anchor="middle" '
                    f'font-family="sans-serif" font-size="11">{t:g}</text>'
                )
        for t in _ticks(min(ys), max(ys)):
            if ly0 - 1e-9 <= math.log10(t) <= ly1 + 1e-9:
                body.append(
                    f'<line x1="{x0 - 5}" y1="{py(t):.1f}" x2="{x0}" y2="{py(t):.1f}" stroke="#333"/>'
                )
                body.append(
                    f'<text x="{x0 - 8}" y="{py(t):.1f}" text-anchor="end" '
                    f'font-family="sans-serif" font-size="11">{t:g}</text>'
                )

        for k, (name, pairs) in enumerate(curves.items()):
            color = COLORS[k % len(COLORS)]
            pts = " ".join(f"{px(e):.2f},{py(v):.2f}" for e, v in pairs)
            body.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>'
            )
            for e, v in pairs:
                body.append(f'<circle cx="{px(e):.2f}" cy="{py(v):.2f}" r="3" fill="{color}"/>')
            ly = MARGIN_T + 15 + 20 * k
            body.append(
                f'<line x1="{x1 + 10}" y1="{ly}" x2="{x1 + 35}" y2="{ly}" '
                f'stroke="{color}" stroke-width="2"/>'
            )
            body.append(
                f'<text x="{x1 + 42}" y="{ly + 4}" font-family="sans-serif" '
                f'font-size="12">{name}</text>'
            )

    body.append(
        f'<text x="{(x0 + x1) / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>'
    )
    body.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write('<?xml version="1.0" encoding="UTF-8"?>\n')
        fh.write("\n".join(body) + "\n")


def write_artifacts(out_dir: str, report, title: str = "convergence") -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, fn in (
        ("report.json", write_json),
        ("report.csv", write_csv),
        ("convergence.svg", lambda p, r: write_svg(p, r, title)),
    ):
        path = os.path.join(out_dir, name)
        fn(path, report)
        paths.append(path)
    return paths
