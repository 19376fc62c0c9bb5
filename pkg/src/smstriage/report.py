"""Report rendering: delimited stats plus matplotlib figures.

The stats command writes the category-proportion table as CSV and renders
the matching descending bar chart (plus a per-category AUC chart when a
model exists) to PNG files next to it.
"""

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def write_proportions_csv(proportions: dict[str, float], path: Path) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["category", "fraction"])
        for category, fraction in proportions.items():
            writer.writerow([category, repr(fraction)])
    return path


def plot_proportions(proportions: dict[str, float], path: Path,
                     title: str = "Messages per category") -> Path:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    names = list(proportions.keys())
    values = [proportions[n] for n in names]
    ax.bar(range(len(names)), values, color="#2f7ed8")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylabel("fraction of classified messages")
    ax.set_title(title)
    ax.set_ylim(0, max(values + [0.01]) * 1.15)
    for i, value in enumerate(values):
        ax.text(i, value, "%.1f%%" % (100 * value), ha="center", va="bottom",
                fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_category_auc(per_category: dict[str, float | None],
                      macro: float | None, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    names = list(per_category.keys())
    values = [per_category[n] if per_category[n] is not None else 0.0 for n in names]
    colors = [
        "#910000" if per_category[n] is None else "#1aadce" for n in names
    ]
    ax.bar(range(len(names)), values, color=colors)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylabel("one-vs-rest AUC")
    ax.set_ylim(0, 1.05)
    ax.axhline(0.5, color="grey", linestyle="--", linewidth=1, label="random (0.5)")
    if macro is not None:
        ax.axhline(macro, color="#492970", linestyle="-", linewidth=1.5,
                   label="macro %.3f" % macro)
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title("Hold-out AUC per category")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_stats_report(stats: dict, metrics: dict | None, out_dir: str | Path) -> list[Path]:
    """Write proportions.csv/.png, metrics.json and auc.png into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    proportions = stats.get("proportions", {})
    written.append(write_proportions_csv(proportions, out / "proportions.csv"))
    if proportions:
        written.append(plot_proportions(proportions, out / "proportions.png"))
    if metrics is not None:
        path = out / "metrics.json"
        path.write_text(json.dumps(metrics, indent=2), encoding="utf-8")
        written.append(path)
        if metrics.get("version"):
            written.append(
                plot_category_auc(
                    metrics.get("perCategoryAuc", {}),
                    metrics.get("macroAuc"),
                    out / "auc.png",
                )
            )
    return written
