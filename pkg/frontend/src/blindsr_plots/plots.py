"""Render the three figure families from harness CSVs.

All readers key off column names from the CSV header (comment lines
starting with '#' are skipped), never off column positions.  Rendering is
a pure function of file content and flags: the same inputs produce the
same PNG bytes.
"""

from __future__ import annotations

import csv
import re
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_phase", "render_convergence", "render_noise"]

_SAVE_KW = {"dpi": 150, "metadata": {"Software": None}}


def _read_csv(path):
    """Return (header, rows-as-dicts), skipping leading comment lines."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    header = reader.fieldnames or []
    return header, list(reader)


def _require(columns, header, path):
    missing = [c for c in columns if c not in header]
    if missing:
        raise ValueError(
            f"{path}: missing columns {missing}; header found: {header}"
        )


def _overlay_curve(expr, xname, yname, xs):
    """Evaluate an overlay equation on an x grid.

    Supported forms: '<y>*<x>=<const>' (hyperbola, e.g. 'r*s=20') and
    '<y>=<expression in x>' (e.g. 'n=2.5*s').
    """
    text = expr.replace(" ", "")
    if "=" not in text:
        raise ValueError(f"overlay {expr!r} must be an equation lhs=rhs")
    lhs, rhs = text.split("=", 1)
    xs = np.asarray(xs, dtype=float)
    scope = {"__builtins__": {}, xname: xs, "sqrt": np.sqrt, "log": np.log}
    if lhs in (f"{yname}*{xname}", f"{xname}*{yname}"):
        return float(eval(rhs, scope)) / xs
    if lhs == yname:
        return np.broadcast_to(np.asarray(eval(rhs, scope), dtype=float), xs.shape)
    raise ValueError(
        f"overlay {expr!r} must solve for {yname!r} "
        f"(forms: '{yname}*{xname}=c' or '{yname}=f({xname})')"
    )


def _phase_axes(rows):
    """Pick heatmap axes from whichever of n, s, r vary in the data."""
    varies = {c: len({row[c] for row in rows}) > 1 for c in ("n", "s", "r")}
    if varies["s"] and varies["r"]:
        return "s", "r"
    if varies["n"] and varies["s"]:
        return "s", "n"
    if varies["n"] and varies["r"]:
        return "r", "n"
    return "s", "r"  # degenerate grid; plot it anyway


def render_phase(csv_path, out_path, overlay=None):
    """Success-rate heatmap (white = 1, black = 0) with optional overlay."""
    header, rows = _read_csv(csv_path)
    _require(["n", "s", "r", "success_rate"], header, csv_path)
    if not rows:
        raise ValueError(f"{csv_path}: no data rows")
    xname, yname = _phase_axes(rows)
    xs = sorted({int(row[xname]) for row in rows})
    ys = sorted({int(row[yname]) for row in rows})
    grid = np.full((len(ys), len(xs)), np.nan)
    for row in rows:
        yi = ys.index(int(row[yname]))
        xi = xs.index(int(row[xname]))
        grid[yi, xi] = float(row["success_rate"])

    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    extent = (xs[0] - 0.5, xs[-1] + 0.5, ys[0] - 0.5, ys[-1] + 0.5)
    ax.imshow(
        grid, cmap="gray", vmin=0.0, vmax=1.0, origin="lower",
        extent=extent, aspect="auto", interpolation="nearest",
    )
    if overlay is not None:
        fine = np.linspace(max(xs[0], 0.5), xs[-1], 400)
        curve = _overlay_curve(overlay, xname, yname, fine)
        keep = (curve >= ys[0] - 0.5) & (curve <= ys[-1] + 0.5)
        ax.plot(fine[keep], curve[keep], color="red", linewidth=1.5)
    ax.set_xlabel(xname)
    ax.set_ylabel(yname)
    ax.set_title("empirical success rate")
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)
    return out_path


def _trace_label(path):
    m = re.search(r"trace_(\d+)", Path(path).stem)
    return f"n = {m.group(1)}" if m else Path(path).stem


def render_convergence(csv_paths, out_path):
    """Semilog-y relative error versus iteration, one line per trace."""
    if isinstance(csv_paths, (str, Path)):
        csv_paths = [csv_paths]
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    for path in csv_paths:
        header, rows = _read_csv(path)
        _require(["iteration", "rel_err"], header, path)
        if not rows:
            raise ValueError(f"{path}: trace is empty")
        it = np.array([int(row["iteration"]) for row in rows])
        err = np.array([float(row["rel_err"]) for row in rows])
        pos = err > 0
        ax.semilogy(it[pos], err[pos], label=_trace_label(path))
    ax.set_xlabel("iteration")
    ax.set_ylabel("relative error")
    ax.legend()
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)
    return out_path


def render_noise(csv_path, out_path):
    """Mean relative error versus SNR in dB, one line per n."""
    header, rows = _read_csv(csv_path)
    _require(["n", "sigma", "snr_db", "mean_rel_err"], header, csv_path)
    kept = [row for row in rows if float(row["sigma"]) > 0]
    if len(kept) < len(rows):
        warnings.warn(
            f"{csv_path}: dropped {len(rows) - len(kept)} noiseless rows "
            "(sigma = 0 has no finite SNR)"
        )
    if not kept:
        raise ValueError(f"{csv_path}: no rows with sigma > 0")
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    for n in sorted({int(row["n"]) for row in kept}):
        pts = sorted(
            ((float(r["snr_db"]), float(r["mean_rel_err"]))
             for r in kept if int(r["n"]) == n)
        )
        snr, err = zip(*pts)
        ax.semilogy(snr, err, marker="o", label=f"n = {n}")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("mean relative error")
    ax.legend()
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)
    return out_path
