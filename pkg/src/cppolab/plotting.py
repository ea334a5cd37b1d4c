"""Learning-curve SVGs from metrics CSV files, written as plain text.

Runs are grouped by the ``algo`` recorded in a sibling ``manifest.json``
(one group per file when there is none). Each group draws the per-iteration
mean across its runs with a sample-std band; the cost plot adds a dashed
line at the cost limit.
"""
from __future__ import annotations

import csv
import json
import math
import os

import numpy as np

from .errors import ConfigError
from .trainer.loop import CSV_COLUMNS

WIDTH, HEIGHT = 640, 400
MARGIN = 56
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def read_metrics(path) -> dict:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != CSV_COLUMNS:
            raise ConfigError(f"{path}: columns {list(header)} do not match {list(CSV_COLUMNS)}")
        rows = list(reader)
    cols = {name: [r[i] for r in rows] for i, name in enumerate(header)}
    return {"steps": np.array(cols["env_steps"], dtype=float),
            "return": np.array(cols["ep_return_mean"], dtype=float),
            "cost": np.array(cols["ep_cost_mean"], dtype=float)}


def _manifest(path):
    mpath = os.path.join(os.path.dirname(os.path.abspath(path)), "manifest.json")
    try:
        with open(mpath) as fh:
            return json.load(fh)
    except (OSError, ValueError):
        return None


def group_runs(paths) -> tuple[dict, float | None]:
    groups = {}
    limit = None
    for path in paths:
        man = _manifest(path)
        label = man["config"]["algo"] if man else os.path.basename(os.path.dirname(os.path.abspath(path))) or path
        if man:
            limit = man["config"]["cost_limit"]
        groups.setdefault(label, []).append(read_metrics(path))
    return groups, limit


def band(runs, key):
    """Per-iteration mean and sample std over runs, truncated to the shortest."""
    n = min(len(r[key]) for r in runs)
    data = np.stack([r[key][:n] for r in runs])
    steps = np.mean([r["steps"][:n] for r in runs], axis=0)
    with np.errstate(invalid="ignore"):
        mean = np.nanmean(data, axis=0) if np.isfinite(data).any() else np.full(n, np.nan)
    std = np.nanstd(data, axis=0, ddof=1) if len(runs) > 1 else np.zeros(n)
    return steps, mean, np.nan_to_num(std)


def _fmt(x):
    return f"{x:.2f}"


def render_svg(title, series, hline=None, ylabel="") -> str:
    """``series`` is a list of ``(label, steps, mean, std)``."""
    xs = np.concatenate([s[1] for s in series]) if series else np.zeros(1)
    lo_y = [np.nanmin(m - s) for _, _, m, s in series if np.isfinite(m).any()]
    hi_y = [np.nanmax(m + s) for _, _, m, s in series if np.isfinite(m).any()]
    if hline is not None:
        lo_y.append(hline)
        hi_y.append(hline)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = (min(lo_y), max(hi_y)) if lo_y else (0.0, 1.0)
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2 * MARGIN)

    def py(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2 * MARGIN)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-size="16">{title}</text>',
           f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
           f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>']
    for frac in (0.0, 0.5, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        out.append(f'<text x="{_fmt(px(xv))}" y="{HEIGHT - MARGIN + 18}" text-anchor="middle" '
                   f'font-size="11">{xv:.4g}</text>')
        out.append(f'<text x="{MARGIN - 6}" y="{_fmt(py(yv))}" text-anchor="end" '
                   f'font-size="11">{yv:.4g}</text>')
    out.append(f'<text x="{WIDTH // 2}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">env steps</text>')
    out.append(f'<text x="14" y="{HEIGHT // 2}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 14 {HEIGHT // 2})">{ylabel}</text>')
    for k, (label, steps, mean, std) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        ok = np.isfinite(mean)
        s, m, d = steps[ok], mean[ok], std[ok]
        if len(s) == 0:
            continue
        upper = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(s, m + d))
        lower = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(s[::-1], (m - d)[::-1]))
        out.append(f'<polygon points="{upper} {lower}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        line = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(s, m))
        out.append(f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{WIDTH - MARGIN + 4}" y="{MARGIN + 14 * k}" font-size="11" '
                   f'fill="{color}">{label}</text>')
    if hline is not None and math.isfinite(hline):
        y = _fmt(py(hline))
        out.append(f'<line x1="{MARGIN}" y1="{y}" x2="{WIDTH - MARGIN}" y2="{y}" stroke="red" '
                   f'stroke-dasharray="6,4"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_runs(paths, out_dir, cost_limit=None) -> list[str]:
    """Write ``return.svg`` and ``cost.svg``; returns their paths."""
    if not paths:
        raise ConfigError("plot needs at least one metrics CSV")
    groups, limit = group_runs(paths)
    if cost_limit is not None:
        limit = cost_limit
    written = []
    os.makedirs(out_dir, exist_ok=True)
    for key, title, hline in (("return", "Episodic return", None), ("cost", "Episodic cost", limit)):
        series = [(label, *band(runs, key)) for label, runs in sorted(groups.items())]
        path = os.path.join(out_dir, f"{key}.svg")
        with open(path, "w") as fh:
            fh.write(render_svg(title, series, hline, ylabel=key))
        written.append(path)
    return written
