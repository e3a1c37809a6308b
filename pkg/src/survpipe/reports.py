"""Report rendering: aligned text tables, delimited twins, and bar figures.

Every table is written twice, as a human-readable aligned-text file and as
a machine-readable CSV with identical content; figures are rendered next
to them. All output is a pure function of the table data, so re-running an
experiment reproduces the metric files byte for byte.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def format_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def render_text_table(title: str, headers: list[str], rows: list[list]) -> str:
    cells = [[format_value(v) for v in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for j, cell in enumerate(row):
            widths[j] = max(widths[j], len(cell))
    def line(parts):
        return "  ".join(p.ljust(w) for p, w in zip(parts, widths)).rstrip()
    out = [title, "=" * len(title), line(headers), line(["-" * w for w in widths])]
    out.extend(line(row) for row in cells)
    return "\n".join(out) + "\n"


def render_csv(headers: list[str], rows: list[list]) -> str:
    out = [",".join(headers)]
    for row in rows:
        out.append(",".join(format_value(v) for v in row))
    return "\n".join(out) + "\n"


def write_table_pair(out_dir: Path, stem: str, title: str,
                     headers: list[str], rows: list[list]) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    txt = out_dir / f"{stem}.txt"
    csv = out_dir / f"{stem}.csv"
    txt.write_text(render_text_table(title, headers, rows))
    csv.write_text(render_csv(headers, rows))
    return [txt, csv]


def grouped_bar_figure(path: Path, title: str, ylabel: str,
                       group_labels: list[str], series: dict[str, list[float]]) -> Path:
    """One bar group per label, one bar per series entry (e.g. per cohort)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    x = np.arange(len(group_labels))
    n_series = max(len(series), 1)
    width = 0.8 / n_series
    fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(group_labels) * n_series), 4.0))
    for i, (name, values) in enumerate(series.items()):
        ax.bar(x + (i - (n_series - 1) / 2) * width, values, width, label=name)
    ax.set_xticks(x)
    ax.set_xticklabels(group_labels, rotation=20, ha="right")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.set_ylim(0.0, 1.0)
    ax.grid(axis="y", alpha=0.3)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def importance_figure(path: Path, title: str, names: list[str], scores: list[float]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    order = np.argsort(scores)
    fig, ax = plt.subplots(figsize=(6.0, 0.4 * len(names) + 1.5))
    ax.barh(np.arange(len(names)), [scores[i] for i in order])
    ax.set_yticks(np.arange(len(names)))
    ax.set_yticklabels([names[i] for i in order])
    ax.set_xlabel("normalized importance")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
