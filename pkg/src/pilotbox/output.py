"""Run output: CSV tables, run manifests, and standalone SVG plots.

The CSV layout is fixed:

    t,quantum,bohm_mean,bohm_stderr,n_effective,n_failed

Floats are written in scientific notation with 17 significant digits, which
round-trips IEEE doubles exactly; analytic-only rows carry ``nan`` in the
Monte Carlo columns and 0 counts.  Line endings are LF.

A manifest (flat ``key = value`` lines) is written next to each CSV; it can
be fed back through ``--config`` to reproduce the run.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .experiments import RunResult, RunRow

__all__ = [
    "CSV_HEADER",
    "emit_csv",
    "read_run_csv",
    "write_manifest",
    "manifest_path",
    "read_config",
    "emit_svg",
]

CSV_HEADER = "t,quantum,bohm_mean,bohm_stderr,n_effective,n_failed"

#: manifest keys that describe the run but are not run parameters
_MANIFEST_INFO_KEYS = ("version", "wall_time_s")


def _fmt(x: float) -> str:
    return f"{x:.17e}" if math.isfinite(x) else "nan"


def emit_csv(result: RunResult, path: str) -> None:
    """Write the run's rows to ``path`` in the fixed CSV layout."""
    lines = [CSV_HEADER]
    for row in result.rows:
        lines.append(
            ",".join(
                (
                    _fmt(row.t),
                    _fmt(row.quantum),
                    _fmt(row.bohm_mean),
                    _fmt(row.bohm_stderr),
                    str(int(row.n_effective)),
                    str(int(row.n_failed)),
                )
            )
        )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_run_csv(path: str):
    """Read a CSV written by :func:`emit_csv` back into rows."""
    with open(path, "r", newline="") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path} is not a run CSV (unexpected header)")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 6:
            raise ValueError(f"malformed CSV row: {ln!r}")
        rows.append(
            RunRow(
                t=float(parts[0]),
                quantum=float(parts[1]),
                bohm_mean=float(parts[2]),
                bohm_stderr=float(parts[3]),
                n_effective=int(parts[4]),
                n_failed=int(parts[5]),
            )
        )
    return rows


def manifest_path(csv_path: str) -> str:
    return csv_path + ".manifest"


def write_manifest(result: RunResult, csv_path: str, version: str) -> str:
    """Write the flat key = value manifest next to ``csv_path``."""
    path = manifest_path(csv_path)
    lines = ["# pilotbox run manifest"]
    for key, value in result.params.items():
        lines.append(f"{key} = {value}")
    lines.append(f"version = {version}")
    lines.append(f"wall_time_s = {result.wall_time_s:.3f}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_config(path: str) -> dict:
    """Parse a flat ``key = value`` config (or manifest) file.

    Returns string values; informational manifest keys are dropped so a
    manifest can be replayed directly.
    """
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key in _MANIFEST_INFO_KEYS:
                continue
            out[key] = value
    return out


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    return [lo + span * i / (n - 1) for i in range(n)]


def emit_svg(result: RunResult, path: str) -> None:
    """Render the run as a standalone SVG: the analytic curve, the ensemble
    estimates with an error band, and labeled axes.

    Rows sharing a time value (the fr experiment) are plotted against the
    row index instead.
    """
    rows = result.rows
    if not rows:
        raise ValueError("cannot plot an empty run")
    t_vals = [row.t for row in rows]
    by_index = len(set(t_vals)) < len(t_vals)
    xs = [float(i + 1) for i in range(len(rows))] if by_index else t_vals
    x_label = "query" if by_index else "t"

    has_mc = any(math.isfinite(row.bohm_mean) for row in rows)
    ys = [row.quantum for row in rows]
    if has_mc:
        for row in rows:
            if math.isfinite(row.bohm_mean):
                band = 3.0 * row.bohm_stderr if math.isfinite(row.bohm_stderr) else 0.0
                ys.extend((row.bohm_mean - band, row.bohm_mean + band))
    y_lo, y_hi = min(ys), max(ys)
    pad = 0.05 * (y_hi - y_lo or 1.0)
    y_lo -= pad
    y_hi += pad
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0

    width, height = 640.0, 400.0
    ml, mr, mt, mb = 64.0, 16.0, 34.0, 46.0

    def sx(x: float) -> float:
        return ml + (x - x_lo) / (x_hi - x_lo) * (width - ml - mr)

    def sy(y: float) -> float:
        return height - mb - (y - y_lo) / (y_hi - y_lo) * (height - mt - mb)

    def pts(pairs) -> str:
        return " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pairs)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="#ffffff"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14" fill="#222222">'
        f"{escape(result.experiment)}</text>",
    ]

    # frame and ticks
    frame = (
        f'<rect x="{ml:.1f}" y="{mt:.1f}" width="{width - ml - mr:.1f}" '
        f'height="{height - mt - mb:.1f}" fill="none" stroke="#888888"/>'
    )
    parts.append(frame)
    for tx in _ticks(x_lo, x_hi):
        px = sx(tx)
        parts.append(
            f'<line x1="{px:.1f}" y1="{height - mb:.1f}" x2="{px:.1f}" '
            f'y2="{height - mb + 5:.1f}" stroke="#888888"/>'
        )
        parts.append(
            f'<text x="{px:.1f}" y="{height - mb + 18:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11" fill="#444444">{tx:.3g}</text>'
        )
    for ty in _ticks(y_lo, y_hi, 6):
        py = sy(ty)
        parts.append(
            f'<line x1="{ml - 5:.1f}" y1="{py:.1f}" x2="{ml:.1f}" y2="{py:.1f}" '
            f'stroke="#888888"/>'
        )
        parts.append(
            f'<text x="{ml - 8:.1f}" y="{py + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" fill="#444444">{ty:.3g}</text>'
        )
    parts.append(
        f'<text x="{(ml + width - mr) / 2:.1f}" y="{height - 8:.1f}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'fill="#222222">{escape(x_label)}</text>'
    )

    if has_mc:
        upper = [
            (x, row.bohm_mean + 3.0 * row.bohm_stderr)
            for x, row in zip(xs, rows)
            if math.isfinite(row.bohm_mean)
        ]
        lower = [
            (x, row.bohm_mean - 3.0 * row.bohm_stderr)
            for x, row in zip(xs, rows)
            if math.isfinite(row.bohm_mean)
        ]
        if len(upper) > 1:
            parts.append(
                f'<polygon points="{pts(upper + lower[::-1])}" fill="#d62728" '
                f'fill-opacity="0.15" stroke="none"/>'
            )

    quantum_pairs = list(zip(xs, (row.quantum for row in rows)))
    if len(quantum_pairs) > 1:
        parts.append(
            f'<polyline points="{pts(quantum_pairs)}" fill="none" '
            f'stroke="#1f77b4" stroke-width="2"/>'
        )
    for x, y in quantum_pairs:
        parts.append(
            f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.2" fill="#1f77b4"/>'
        )

    if has_mc:
        mc_pairs = [
            (x, row.bohm_mean) for x, row in zip(xs, rows) if math.isfinite(row.bohm_mean)
        ]
        if len(mc_pairs) > 1:
            parts.append(
                f'<polyline points="{pts(mc_pairs)}" fill="none" '
                f'stroke="#d62728" stroke-width="1.5" stroke-dasharray="5,3"/>'
            )
        for x, y in mc_pairs:
            parts.append(
                f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.8" fill="#d62728"/>'
            )

    # legend
    lx, ly = ml + 10.0, mt + 14.0
    parts.append(
        f'<line x1="{lx:.1f}" y1="{ly:.1f}" x2="{lx + 24:.1f}" y2="{ly:.1f}" '
        f'stroke="#1f77b4" stroke-width="2"/>'
    )
    parts.append(
        f'<text x="{lx + 30:.1f}" y="{ly + 4:.1f}" font-family="sans-serif" '
        f'font-size="11" fill="#222222">quantum</text>'
    )
    if has_mc:
        parts.append(
            f'<line x1="{lx:.1f}" y1="{ly + 16:.1f}" x2="{lx + 24:.1f}" '
            f'y2="{ly + 16:.1f}" stroke="#d62728" stroke-width="1.5" '
            f'stroke-dasharray="5,3"/>'
        )
        parts.append(
            f'<text x="{lx + 30:.1f}" y="{ly + 20:.1f}" font-family="sans-serif" '
            f'font-size="11" fill="#222222">trajectories (3 SE band)</text>'
        )

    parts.append("</svg>")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
