"""Figure rendering for experiment outputs.

All figures are written to files (no interactive backends); the CSV next to a
figure remains the authoritative record.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def value_histogram(values: Sequence, path: str, title: str = "value distribution") -> None:
    """Histogram of per-trial values (fractions accepted as floats)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist([float(v) for v in values], bins=20, range=(0.0, 1.0),
            color="steelblue", edgecolor="black")
    ax.set_xlabel("value")
    ax.set_ylabel("trials")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def rate_bars(labels: Sequence[str], rates: Sequence, radii: Sequence, path: str,
              title: str = "acceptance rates") -> None:
    """Bar chart of acceptance rates with confidence radii as error bars."""
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = range(len(labels))
    ax.bar(xs, [float(r) for r in rates], yerr=[float(r) for r in radii],
           color="darkseagreen", edgecolor="black", capsize=4)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("acceptance rate")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
