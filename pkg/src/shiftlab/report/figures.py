"""File-rendered figures for plot-data documents.

This is the consuming side of the plot-data contract: it turns scatter
records into a rasterized figure next to the delimited output. Rendering
uses the Agg backend so it works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from ..errors import ValidationError


def render_scatter_figure(records: list[dict], out_path: str | Path, dpi: int = 150) -> None:
    """Draw baseline points, fitted line, and annotated query points."""
    out_path = Path(out_path)
    baseline = [r for r in records if r.get("kind") == "point" and r.get("role") == "baseline"]
    queries = [r for r in records if r.get("kind") == "point" and r.get("role") == "query"]
    lines = [r for r in records if r.get("kind") == "line"]
    annotations = {r["classifier_id"]: r for r in records if r.get("kind") == "annotation"}
    if not baseline and not queries and not lines:
        raise ValidationError("no drawable records in plot data")

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    try:
        if baseline:
            ax.scatter(
                [r["x"] for r in baseline],
                [r["y"] for r in baseline],
                s=28, color="#4878a8", label="baseline classifiers", zorder=3,
            )
        for line in lines:
            ax.plot(
                [line["x0"], line["x1"]],
                [line["y0"], line["y1"]],
                color="#444444", linestyle="--", linewidth=1.2,
                label="fitted baseline", zorder=2,
            )
        if queries:
            ax.scatter(
                [r["x"] for r in queries],
                [r["y"] for r in queries],
                s=60, color="#c03028", marker="*", label="queries", zorder=4,
            )
            for r in queries:
                note = annotations.get(r.get("classifier_id"))
                if note is not None:
                    ax.annotate(
                        f"{r.get('classifier_id', '')} ({note['er']:+.1f})",
                        (r["x"], r["y"]),
                        textcoords="offset points", xytext=(6, 5), fontsize=8,
                    )
        ax.set_xlabel("source accuracy (%)")
        ax.set_ylabel("shifted accuracy (%)")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        fig.savefig(out_path, dpi=dpi)
    finally:
        plt.close(fig)
