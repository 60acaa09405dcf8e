"""Matplotlib figures written next to the delimited evaluation output."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import BucketStats, EvalReport


def plot_method_comparison(reports: Sequence[EvalReport], path: str | Path) -> None:
    """Horizontal AUC bars, best method on top."""
    fig, ax = plt.subplots(figsize=(7, 0.5 * len(reports) + 1.5))
    names = [r.method for r in reports][::-1]
    aucs = [r.roc_auc for r in reports][::-1]
    bars = ax.barh(names, aucs, color="#4878cf")
    for bar, auc in zip(bars, aucs):
        ax.text(auc + 0.005, bar.get_y() + bar.get_height() / 2, f"{auc:.4f}", va="center", fontsize=8)
    ax.axvline(0.5, color="grey", linestyle=":", linewidth=1, label="chance")
    ax.set_xlim(0.0, 1.05)
    ax.set_xlabel("ROC AUC")
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title("Similarity method comparison")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_roc_curves(
    curves: Mapping[str, Sequence[tuple[float, float]]], path: str | Path
) -> None:
    fig, ax = plt.subplots(figsize=(6, 6))
    for method, curve in curves.items():
        xs = [p[0] for p in curve]
        ys = [p[1] for p in curve]
        ax.plot(xs, ys, label=method, linewidth=1.2)
    ax.plot([0, 1], [0, 1], color="grey", linestyle=":", linewidth=1)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title("ROC curves")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_ablation(reports: Sequence[EvalReport], path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    names = [r.method for r in reports]
    aucs = [r.roc_auc for r in reports]
    ax.bar(names, aucs, color=["#4878cf", "#6acc65", "#d65f5f", "#b47cc7"])
    for i, auc in enumerate(aucs):
        ax.text(i, auc + 0.005, f"{auc:.4f}", ha="center", fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("ROC AUC")
    ax.set_title("Contribution of the weighting and routing steps")
    ax.tick_params(axis="x", labelrotation=15)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_bucket_histogram(stats: BucketStats, path: str | Path) -> None:
    """Two panels: issues per size bucket and reports per size bucket."""
    labels = [f"[{lo:.1f},{hi:.1f})" for lo, hi in BucketStats.edges()]
    labels[-1] = labels[-1].replace(")", "]")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
    ax1.bar(labels, stats.issue_counts, color="#4878cf")
    ax1.set_ylabel("issues")
    ax1.set_title("Issues per size bucket")
    ax2.bar(labels, stats.report_counts, color="#6acc65")
    ax2.set_ylabel("reports")
    ax2.set_title("Reports per size bucket")
    for ax in (ax1, ax2):
        ax.set_xlabel("log-scaled issue size (relative to largest)")
        ax.tick_params(axis="x", labelrotation=60, labelsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
