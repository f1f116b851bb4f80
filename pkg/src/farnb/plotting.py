"""Figures written next to the benchmark's delimited reports.

Uses the object-oriented matplotlib API (no pyplot state), so rendering
works headless and repeated runs produce the same files.
"""

from __future__ import annotations

import matplotlib
from matplotlib.figure import Figure

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    "svg.hashsalt": "farnb",
}
# keep PNG output free of run-dependent metadata
_METADATA = {"Software": None}


def _save(fig: Figure, path):
    fig.savefig(path, metadata=_METADATA)


def plot_gain(rows, reference: str, against: str, path):
    """Bar chart of per-dataset accuracy gain of ``reference`` over ``against``.

    ``rows`` are ``(dataset, reference_mean, other_mean, gain)`` tuples.
    """
    with matplotlib.rc_context(STYLE):
        names = [r[0] for r in rows]
        gains = [100.0 * r[3] for r in rows]
        fig = Figure(figsize=(max(3.5, 0.5 * len(rows) + 1.5), 3.0))
        ax = fig.add_subplot()
        colors = ["tab:blue" if g >= 0 else "tab:red" for g in gains]
        ax.bar(range(len(rows)), gains, color=colors)
        ax.axhline(0.0, color="black", linewidth=0.6)
        ax.set_xticks(range(len(rows)), names, rotation=45, ha="right")
        ax.set_ylabel("accuracy gain (%)")
        ax.set_title(f"{reference} vs {against}")
        _save(fig, path)


def plot_method_means(report, path, labels=None):
    """Grouped bars of mean accuracy per dataset and method."""
    labels = labels or {}
    methods = report.methods
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(max(3.5, 0.9 * len(report.datasets) + 1.5), 3.0))
        ax = fig.add_subplot()
        width = 0.8 / len(methods)
        for i, method in enumerate(methods):
            xs = [d + (i - (len(methods) - 1) / 2) * width for d in range(len(report.datasets))]
            ax.bar(xs, [report.means[ds, method] for ds in report.datasets], width,
                   label=labels.get(method, method))
        ax.set_xticks(range(len(report.datasets)), report.datasets, rotation=45, ha="right")
        ax.set_ylim(0.0, 1.0)
        ax.set_ylabel("mean accuracy")
        ax.legend(frameon=False, fontsize=7, ncol=len(methods))
        _save(fig, path)
