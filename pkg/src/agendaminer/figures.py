"""Matplotlib renderings written alongside the delimited outputs."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def similarity_histogram(
    similarities: Sequence[float], threshold: float, path: str | Path, title: str = ""
) -> Path:
    """Distribution of retrieved-paragraph similarities with the threshold marked."""
    fig, ax = plt.subplots(figsize=(7, 4))
    if similarities:
        ax.hist(similarities, bins=24, color="#4c72b0", edgecolor="white")
    ax.axvline(threshold, color="#c44e52", linestyle="--", label=f"threshold {threshold:.2f}")
    ax.set_xlabel("cosine similarity")
    ax.set_ylabel("paragraphs")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def metrics_bars(report, path: str | Path) -> Path:
    """Grouped accuracy/precision/recall/F1 bars per agenda."""
    rows = report.per_agenda
    names = [r.name for r in rows]
    series = {
        "accuracy": [r.accuracy for r in rows],
        "precision": [r.precision for r in rows],
        "recall": [r.recall for r in rows],
        "F1": [r.f1 for r in rows],
    }
    width = 0.2
    fig, ax = plt.subplots(figsize=(max(7, 1.4 * len(names)), 4.5))
    for offset, (label, values) in enumerate(series.items()):
        ax.bar(
            [i + (offset - 1.5) * width for i in range(len(names))],
            values,
            width=width,
            label=label,
        )
    ax.axhline(report.macro_f1, color="gray", linestyle=":", label=f"macro F1 {report.macro_f1:.2f}")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.legend(loc="lower right", ncols=2)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
