"""Figure rendering for report outputs.

Every helper takes prepared data plus an output path and writes a PNG next
to the delimited report it illustrates.  The Agg backend is forced so the
CLI renders headlessly.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_confusion_heatmap(
    confusion: Mapping[str, Mapping[str, int]],
    labels: Sequence[str],
    path: str | Path,
    title: str = "Confusion matrix",
) -> Path:
    """Gold systems on rows, predictions on columns, counts annotated."""
    matrix = [[confusion[g][p] for p in labels] for g in labels]
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    image = ax.imshow(matrix, cmap="Blues")
    peak = max((max(row) for row in matrix), default=0)
    for i, gold in enumerate(labels):
        for j, _pred in enumerate(labels):
            count = matrix[i][j]
            ax.text(
                j, i, str(count),
                ha="center", va="center",
                color="white" if peak and count > peak / 2 else "black",
            )
    ax.set_xticks(range(len(labels)), labels)
    ax.set_yticks(range(len(labels)), labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("gold")
    ax.set_title(title)
    fig.colorbar(image, ax=ax, shrink=0.8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_ambiguity_distribution(
    class_counts: Mapping[str, int], path: str | Path
) -> Path:
    """Bar chart of how many notations fall in each reading-ambiguity class."""
    names = list(class_counts)
    counts = [class_counts[n] for n in names]
    fig, ax = plt.subplots(figsize=(max(5.0, 0.55 * len(names) + 2), 3.6))
    ax.bar(range(len(names)), counts, color="#4878a8")
    ax.set_xticks(range(len(names)), names, rotation=45, ha="right")
    ax.set_ylabel("notations")
    ax.set_title("Possible readings per notation")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_training_curve(log_entries: Sequence, path: str | Path) -> Path:
    """Rules and bootstrap-labeled examples per training iteration."""
    iterations = [e.iteration for e in log_entries]
    rules = [e.rules for e in log_entries]
    labeled = [e.bootstrap_labeled for e in log_entries]
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    ax.plot(iterations, rules, marker="o", markersize=3, label="rules in list")
    ax.plot(iterations, labeled, marker="s", markersize=3, label="bootstrap-labeled")
    ax.set_xlabel("iteration")
    ax.set_ylabel("count")
    ax.set_title("Training progress")
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_magnitude_chart(
    rows: Sequence, path: str | Path, top: int = 20
) -> Path:
    """Horizontal bars for the largest mean magnitudes by feature and system."""
    shown = list(rows)[:top]
    names = [f"{r.feature} [{r.system.value}]" for r in shown]
    means = [float(r.mean) for r in shown]
    fig, ax = plt.subplots(figsize=(6.4, max(2.4, 0.32 * len(shown) + 1.2)))
    ax.barh(range(len(shown)), means, color="#4878a8")
    ax.set_yticks(range(len(shown)), names, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("mean magnitude (multiples of N01)")
    ax.set_title("Numeral magnitude by feature")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
