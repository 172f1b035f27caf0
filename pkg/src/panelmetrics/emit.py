"""Result emission: CSV, JSON, run config echo, and a small SVG plotter.

The data files are the contract. CSV carries 6 significant digits for
eyeballing and diffing; JSON keeps full double precision. The SVG
renderer is a convenience view of data already written elsewhere, kept
deliberately plain: polylines, two axes, a text legend.
"""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Any, Sequence

import numpy as np

__all__ = [
    "fmt6",
    "to_jsonable",
    "write_csv",
    "write_json",
    "write_run_config",
    "PlotSeries",
    "svg_line_plot",
]


def fmt6(value: Any) -> str:
    """Render one CSV cell; floats get 6 significant digits."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6g}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt6(cell) for cell in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def to_jsonable(obj: Any) -> Any:
    """Recursively convert dataclasses/arrays/numpy scalars to JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: to_jsonable(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
        }
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(json.dumps(to_jsonable(obj), indent=2) + "\n")


def write_run_config(out_dir: str | Path, config: dict, version: str) -> None:
    """Echo the fully resolved run configuration next to the outputs."""
    doc = {"tool_version": version, "config": to_jsonable(config)}
    write_json(Path(out_dir) / "run.json", doc)


@dataclasses.dataclass(frozen=True)
class PlotSeries:
    label: str
    x: np.ndarray
    y: np.ndarray
    kind: str = "line"  # "line" or "points"


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#7f7f7f")

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 20, 40, 50


def _spread(lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        pad = 0.5 if lo == 0 else abs(lo) * 0.1
        return lo - pad, hi + pad
    return lo, hi


def svg_line_plot(
    path: str | Path,
    series: Sequence[PlotSeries],
    title: str,
    xlabel: str,
    ylabel: str,
    xlog: bool = False,
) -> None:
    """Write a minimal standalone SVG of the given series."""
    xs = [np.log10(s.x) if xlog else np.asarray(s.x, dtype=float) for s in series]
    ys = [np.asarray(s.y, dtype=float) for s in series]
    x_lo, x_hi = _spread(min(float(a.min()) for a in xs), max(float(a.max()) for a in xs))
    y_lo, y_hi = _spread(min(float(a.min()) for a in ys), max(float(a.max()) for a in ys))

    def px(x: float) -> float:
        return _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def py(y: float) -> float:
        return _H - _MB - (y - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    def xtick(x: float) -> str:
        val = 10.0**x if xlog else x
        return f"{val:.3g}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
        f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>',
        f'<text x="16" y="{(_MT + _H - _MB) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.1f})">{ylabel}</text>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        gx = x_lo + frac * (x_hi - x_lo)
        gy = y_lo + frac * (y_hi - y_lo)
        parts.append(
            f'<text x="{px(gx):.1f}" y="{_H - _MB + 16}" text-anchor="middle">{xtick(gx)}</text>'
        )
        parts.append(
            f'<text x="{_ML - 6}" y="{py(gy) + 4:.1f}" text-anchor="end">{gy:.3g}</text>'
        )
        if frac > 0:
            parts.append(
                f'<line x1="{_ML}" y1="{py(gy):.1f}" x2="{_W - _MR}" y2="{py(gy):.1f}" '
                f'stroke="#dddddd"/>'
            )

    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        sx, sy = xs[i], ys[i]
        if s.kind == "points":
            for xv, yv in zip(sx, sy):
                parts.append(
                    f'<circle cx="{px(float(xv)):.1f}" cy="{py(float(yv)):.1f}" r="4" '
                    f'fill="{color}"/>'
                )
        else:
            coords = " ".join(
                f"{px(float(xv)):.1f},{py(float(yv)):.1f}" for xv, yv in zip(sx, sy)
            )
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        parts.append(
            f'<text x="{_W - _MR - 6}" y="{_MT + 14 + 16 * i}" text-anchor="end" '
            f'fill="{color}">{s.label}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
