"""Figures for benchmark and oracle reports."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {
    "mmh-mh": dict(color="tab:red", marker="o", label="MMH-MH"),
    "toeplitz": dict(color="tab:blue", marker="s", label="Toeplitz (exact convolution)"),
    "mh-only": dict(color="tab:green", marker="^", label="MH only"),
}


def plot_throughput(report, path) -> Path:
    """Throughput (Mbps) against input block size, one line per algorithm."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for algo in report.config.get("algorithms", []):
        recs = [r for r in report.records if r.algorithm == algo and r.status == "ok"]
        if not recs:
            continue
        xs = [r.n for r in recs]
        ys = [r.throughput_bps / 1e6 for r in recs]
        ax.plot(xs, ys, linewidth=1.2, markersize=5, **_STYLE.get(algo, {"label": algo}))
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("input block size n (bits)")
    ax.set_ylabel("throughput (Mbps)")
    ax.grid(True, which="both", linewidth=0.3, alpha=0.6)
    ax.legend(frameon=False, fontsize=8)
    if report.config.get("reuse_seeds"):
        ax.set_title("seeds reused across trials", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_oracles(results, path) -> Path:
    """Measured value against bound for each oracle check, log scale."""
    path = Path(path)
    rows = [r for r in results if r.bound > 0 and r.measured >= 0 and math.isfinite(r.bound)]
    fig, ax = plt.subplots(figsize=(6.4, 0.35 * len(rows) + 1.2))
    ys = range(len(rows))
    ax.barh([y + 0.2 for y in ys], [r.bound for r in rows], height=0.4, color="0.75", label="bound")
    ax.barh([y - 0.2 for y in ys], [max(r.measured, 1e-12) for r in rows], height=0.4,
            color=["tab:green" if r.passed else "tab:red" for r in rows], label="measured")
    ax.set_yticks(list(ys))
    ax.set_yticklabels([r.name for r in rows], fontsize=6)
    ax.set_xscale("log")
    ax.legend(frameon=False, fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
