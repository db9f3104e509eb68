"""Deterministic result serialization: CSV tables, JSON sidecars, SVG plots.

CSV follows RFC 4180 (CRLF records, minimal quoting) with '.' decimal
separator and 17 significant digits, so identical runs are byte-identical.
The JSON sidecar carries the full configuration, schema and code versions,
wall time, and drift diagnostics.  Plots are self-contained SVG documents
written without any external renderer.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import json
import os
from datetime import datetime, timezone

import numpy as np

SCHEMA_VERSION = "1"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if np.isnan(x):
            return "nan"
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: str, header: list[str], rows) -> str:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _jsonable(obj):
    if isinstance(obj, enum.Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: _jsonable(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
        }
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_sidecar(path: str, config, extra: dict | None = None) -> str:
    from . import __version__

    doc = {
        "schema_version": SCHEMA_VERSION,
        "code_version": __version__,
        "written_utc": datetime.now(timezone.utc).isoformat(),
        "config": _jsonable(config),
    }
    if extra:
        doc.update(_jsonable(extra))
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_sidecar(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# minimal self-contained SVG plotting

_VIRIDIS = [
    (0.267, 0.005, 0.329),
    (0.283, 0.141, 0.458),
    (0.254, 0.265, 0.530),
    (0.207, 0.372, 0.553),
    (0.164, 0.471, 0.558),
    (0.128, 0.567, 0.551),
    (0.135, 0.659, 0.518),
    (0.267, 0.749, 0.441),
    (0.478, 0.821, 0.318),
    (0.741, 0.873, 0.150),
    (0.993, 0.906, 0.144),
]


def _color(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    x = t * (len(_VIRIDIS) - 1)
    i = min(int(x), len(_VIRIDIS) - 2)
    f = x - i
    rgb = [
        (1 - f) * _VIRIDIS[i][c] + f * _VIRIDIS[i + 1][c] for c in range(3)
    ]
    return "#%02x%02x%02x" % tuple(int(round(255 * v)) for v in rgb)


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10 ** np.floor(np.log10(raw))
    step = min(
        (m * mag for m in (1, 2, 2.5, 5, 10)),
        key=lambda s: abs(s - raw),
    )
    first = np.ceil(lo / step) * step
    return np.arange(first, hi + 0.5 * step, step)


def svg_line_plot(
    path: str,
    x,
    series: dict,
    xlabel: str = "",
    ylabel: str = "",
    title: str = "",
    logy: bool = False,
    width: int = 640,
    height: int = 420,
) -> str:
    """Polyline plot of one or more named series against a shared x axis."""
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    if logy:
        ys = {k: np.log10(np.where(v > 0, v, np.nan)) for k, v in ys.items()}
    m_l, m_r, m_t, m_b = 62, 16, 28, 46
    all_y = np.concatenate([v[np.isfinite(v)] for v in ys.values()])
    if len(all_y) == 0:
        all_y = np.array([0.0, 1.0])
    ylo, yhi = float(all_y.min()), float(all_y.max())
    if yhi == ylo:
        yhi = ylo + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad
    xlo, xhi = float(x.min()), float(x.max())
    if xhi == xlo:
        xhi = xlo + 1.0

    def X(v):
        return m_l + (v - xlo) / (xhi - xlo) * (width - m_l - m_r)

    def Y(v):
        return height - m_b - (v - ylo) / (yhi - ylo) * (height - m_t - m_b)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="18" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{title}</text>',
    ]
    for tx in _ticks(xlo, xhi):
        parts.append(
            f'<line x1="{X(tx):.1f}" y1="{height - m_b}" x2="{X(tx):.1f}" '
            f'y2="{height - m_b + 4}" stroke="black"/>'
            f'<text x="{X(tx):.1f}" y="{height - m_b + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{tx:.4g}</text>'
        )
    for ty in _ticks(ylo, yhi):
        lbl = f"1e{ty:.3g}" if logy else f"{ty:.4g}"
        parts.append(
            f'<line x1="{m_l - 4}" y1="{Y(ty):.1f}" x2="{m_l}" y2="{Y(ty):.1f}" '
            f'stroke="black"/>'
            f'<text x="{m_l - 6}" y="{Y(ty) + 3:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{lbl}</text>'
        )
    parts.append(
        f'<rect x="{m_l}" y="{m_t}" width="{width - m_l - m_r}" '
        f'height="{height - m_t - m_b}" fill="none" stroke="black"/>'
    )
    for i, (name, y) in enumerate(ys.items()):
        ok = np.isfinite(y)
        pts = " ".join(
            f"{X(xv):.1f},{Y(yv):.1f}" for xv, yv in zip(x[ok], y[ok])
        )
        color = _PALETTE[i % len(_PALETTE)]
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{width - m_r - 6}" y="{m_t + 14 + 14 * i}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" fill="{color}">{name}</text>'
        )
    parts.append(
        f'<text x="{(m_l + width - m_r) / 2:.0f}" y="{height - 8}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="11">{xlabel}</text>'
    )
    parts.append(
        f'<text x="14" y="{(m_t + height - m_b) / 2:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="11" '
        f'transform="rotate(-90 14 {(m_t + height - m_b) / 2:.0f})">{ylabel}</text>'
    )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
    return path


def svg_heatmap(
    path: str,
    x,
    y,
    z,
    xlabel: str = "",
    ylabel: str = "",
    title: str = "",
    width: int = 560,
    height: int = 480,
) -> str:
    """Rect-grid heatmap of z[i, j] over x[i] (columns) and y[j] (rows)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    m_l, m_r, m_t, m_b = 62, 60, 28, 46
    zlo = float(np.nanmin(z))
    zhi = float(np.nanmax(z))
    if zhi == zlo:
        zhi = zlo + 1.0
    pw = (width - m_l - m_r) / len(x)
    ph = (height - m_t - m_b) / len(y)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="18" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{title}</text>',
    ]
    for i in range(len(x)):
        for j in range(len(y)):
            v = z[i, j]
            if not np.isfinite(v):
                continue
            color = _color((v - zlo) / (zhi - zlo))
            px = m_l + i * pw
            py = height - m_b - (j + 1) * ph
            parts.append(
                f'<rect x="{px:.1f}" y="{py:.1f}" width="{pw + 0.5:.1f}" '
                f'height="{ph + 0.5:.1f}" fill="{color}"/>'
            )
    for i in (0, len(x) // 2, len(x) - 1):
        px = m_l + (i + 0.5) * pw
        parts.append(
            f'<text x="{px:.1f}" y="{height - m_b + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{x[i]:.3g}</text>'
        )
    for j in (0, len(y) // 2, len(y) - 1):
        py = height - m_b - (j + 0.5) * ph
        parts.append(
            f'<text x="{m_l - 6}" y="{py + 3:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{y[j]:.3g}</text>'
        )
    # colorbar
    for s in range(60):
        t = s / 59.0
        cy = height - m_b - (s + 1) / 60.0 * (height - m_t - m_b)
        parts.append(
            f'<rect x="{width - m_r + 14}" y="{cy:.1f}" width="14" '
            f'height="{(height - m_t - m_b) / 60 + 0.5:.1f}" fill="{_color(t)}"/>'
        )
    parts.append(
        f'<text x="{width - m_r + 21}" y="{m_t - 6}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="9">{zhi:.3g}</text>'
    )
    parts.append(
        f'<text x="{width - m_r + 21}" y="{height - m_b + 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="9">{zlo:.3g}</text>'
    )
    parts.append(
        f'<text x="{(m_l + width - m_r) / 2:.0f}" y="{height - 8}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="11">{xlabel}</text>'
    )
    parts.append(
        f'<text x="14" y="{(m_t + height - m_b) / 2:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="11" '
        f'transform="rotate(-90 14 {(m_t + height - m_b) / 2:.0f})">{ylabel}</text>'
    )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
    return path


def emit_sweep_outputs(result, cfg, stem: str, wall_time: float) -> list[str]:
    """CSV + JSON (+ optional SVG) for a SweepResult; returns written paths."""
    os.makedirs(cfg.outdir, exist_ok=True)
    axis_keys = list(result.points[0].axis.keys()) if result.points else []
    val_keys = sorted({k for pt in result.points for k in pt.values})
    flag_keys = sorted({k for pt in result.points for k in pt.flags})
    header = axis_keys + val_keys + [f"flag_{k}" for k in flag_keys] + ["warnings"]
    rows = []
    for pt in result.points:
        rows.append(
            [pt.axis.get(k) for k in axis_keys]
            + [pt.values.get(k) for k in val_keys]
            + [pt.flags.get(k) for k in flag_keys]
            + ["; ".join(pt.warnings)]
        )
    paths = []
    csv_path = os.path.join(cfg.outdir, f"{stem}.csv")
    paths.append(write_csv(csv_path, header, rows))
    side = os.path.join(cfg.outdir, f"{stem}.json")
    paths.append(
        write_sidecar(
            side,
            cfg,
            {
                "schema": result.schema,
                "wall_time_s": wall_time,
                "n_points": len(result.points),
            },
        )
    )
    if cfg.plot and result.points:
        svg = os.path.join(cfg.outdir, f"{stem}.svg")
        if len(axis_keys) == 1:
            xs = [pt.axis[axis_keys[0]] for pt in result.points]
            series = {}
            for k in val_keys:
                col = [
                    pt.values.get(k) if pt.values.get(k) is not None else np.nan
                    for pt in result.points
                ]
                if k in ("A_RS", "A_mu", "J_RS_fit", "J_RS_reduced"):
                    series[k] = col
            paths.append(
                svg_line_plot(svg, xs, series, xlabel=axis_keys[0], title=stem)
            )
        elif len(axis_keys) == 2:
            xs = sorted({pt.axis[axis_keys[0]] for pt in result.points})
            ys = sorted({pt.axis[axis_keys[1]] for pt in result.points})
            z = np.full((len(xs), len(ys)), np.nan)
            for pt in result.points:
                i = xs.index(pt.axis[axis_keys[0]])
                j = ys.index(pt.axis[axis_keys[1]])
                z[i, j] = pt.values.get("A_RS", np.nan)
            paths.append(
                svg_heatmap(
                    svg, xs, ys, z,
                    xlabel=axis_keys[0], ylabel=axis_keys[1], title=stem,
                )
            )
    return paths
