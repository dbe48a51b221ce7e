"""Figure rendering for CLI reports.

Every renderer takes already-computed report objects and writes a PNG next
to the delimited output; nothing here recomputes statistics.
"""

from __future__ import annotations

import math
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .hardness import SweepResult
from .simulation import QCurve, RatioReport


def plot_ratios(reports: Sequence[RatioReport], path: str) -> None:
    """Per-instance competitive ratios with 95% CIs against the 1 - 1/e line."""
    fig, ax = plt.subplots(figsize=(max(4, 0.9 * len(reports)), 4))
    xs = range(len(reports))
    ratios = [r.ratio for r in reports]
    lo = [r.ratio - r.ci_lo for r in reports]
    hi = [r.ci_hi - r.ratio for r in reports]
    ax.errorbar(xs, ratios, yerr=[lo, hi], fmt="o", capsize=3)
    ax.axhline(1 - 1 / math.e, color="gray", linestyle="--", label="1 - 1/e")
    ax.set_xticks(list(xs))
    ax.set_xticklabels([r.instance for r in reports], rotation=45, ha="right")
    ax.set_ylabel("E[ALG] / E[OPT]")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_qcurve(curve: QCurve, path: str) -> None:
    """Survival curves per item with the e^{-t} reference."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for j, col in enumerate(curve.qhat):
        ax.plot(curve.grid, col, label=f"item {j}")
    ax.plot(curve.grid, [math.exp(-t) for t in curve.grid], "k--", label="exp(-t)")
    if curve.residual is not None:
        ax2 = ax.twinx()
        ax2.plot(curve.grid, curve.residual, color="tab:red", alpha=0.5, label="residual")
        ax2.set_ylabel("residual", color="tab:red")
    ax.set_xlabel("t")
    ax.set_ylabel("q(t)")
    ax.legend(loc="lower left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(sweep: SweepResult, path: str) -> None:
    """Fixed-threshold ratio over the skip-probability grid, with the best
    point and the 1 - 1/e benchmark marked."""
    fig, ax = plt.subplots(figsize=(6, 4))
    cs = [(1.0 - p) * sweep.n for p in sweep.grid]
    ax.plot(cs, sweep.ratios, lw=1)
    ax.axhline(sweep.bound, color="gray", linestyle="--", label="1 - 1/e")
    ax.plot([(1.0 - sweep.best_p) * sweep.n], [sweep.best_ratio], "r*", label="best")
    ax.set_xlim(0, 5)
    ax.set_xlabel("c  (skip probability p = 1 - c/n)")
    ax.set_ylabel("E[ALG] / E[OPT]")
    ax.set_title(f"n = {sweep.n}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
