"""Robustness scatter data: source accuracy vs shifted accuracy.

render_er_scatter emits a line-delimited plot-data document rather than
pixels: baseline classifier points, the fitted line's endpoints across the
observed x range, and one annotation per query carrying its robustness
value. Any plotting tool (including the bundled figure renderer) consumes
this file; emission itself is pure and byte-stable.
"""

from __future__ import annotations

from pathlib import Path

from ..errors import FormatError
from ..lineio import dumps, iter_records
from ..metrics.baseline import BaselineFit, ClassifierPoint, effective_robustness


def render_er_scatter(
    zoo: list[ClassifierPoint],
    fit: BaselineFit,
    queries: list[ClassifierPoint] | None = None,
) -> str:
    """Plot-data document: points, one line record, query annotations."""
    queries = queries or []
    records = []
    xs = [p.source_accuracy for p in zoo] + [q.source_accuracy for q in queries]
    for p in zoo:
        records.append({
            "kind": "point",
            "role": "baseline",
            "classifier_id": p.classifier_id,
            "x": p.source_accuracy,
            "y": p.shifted_accuracy,
        })
    if xs:
        x0, x1 = min(xs), max(xs)
        records.append({
            "kind": "line",
            "x0": x0,
            "y0": fit.predict(x0),
            "x1": x1,
            "y1": fit.predict(x1),
            "slope": fit.slope,
            "intercept": fit.intercept,
        })
    for q in queries:
        records.append({
            "kind": "point",
            "role": "query",
            "classifier_id": q.classifier_id,
            "x": q.source_accuracy,
            "y": q.shifted_accuracy,
        })
        records.append({
            "kind": "annotation",
            "classifier_id": q.classifier_id,
            "x": q.source_accuracy,
            "y": q.shifted_accuracy,
            "er": effective_robustness(q, fit),
        })
    return "".join(dumps(r) + "\n" for r in records)


def write_scatter(document: str, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(document)


def read_scatter(path: str | Path) -> list[dict]:
    """Parse a plot-data document back into records, validating kinds."""
    records = []
    for lineno, obj in iter_records(path):
        kind = obj.get("kind")
        if kind not in ("point", "line", "annotation"):
            raise FormatError(f"{path}:{lineno}: unknown record kind {kind!r}")
        records.append(obj)
    return records
