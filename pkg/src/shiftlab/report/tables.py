"""Comparison tables as aligned text, CSV, or Markdown.

Rendering is a pure function of the comparison: no timestamps, no
environment lookups, byte-identical on every run. Numbers print with one
decimal, ties rounded half to even (banker's rounding), which matches
Python's round().
"""

from __future__ import annotations

import io

from ..errors import ValidationError
from ..evaluator import Comparison

FORMATS = ("text", "csv", "md")
COLUMN_KINDS = ("acc", "ag", "er")


def one_decimal(value: float | None) -> str:
    if value is None:
        return ""
    return f"{round(value, 1):.1f}"


def _header_and_rows(comparison: Comparison, columns: tuple[str, ...]) -> tuple[list[str], list[list[str]]]:
    header = ["classifier", "recipe", comparison.source_tag]
    for tag in comparison.shifted_order:
        if "acc" in columns:
            header.append(tag)
        if "ag" in columns:
            header.append(f"{tag} gap")
        if "er" in columns:
            header.append(f"{tag} robustness")
    header.append("average")

    body: list[list[str]] = []
    for row in comparison.rows:
        cells = [row.classifier_id, row.training_recipe, one_decimal(row.source_accuracy)]
        for tag in comparison.shifted_order:
            cell = row.cells[tag]
            if "acc" in columns:
                cells.append(one_decimal(cell.accuracy))
            if "ag" in columns:
                cells.append(one_decimal(cell.gap))
            if "er" in columns:
                cells.append(one_decimal(cell.er))
        cells.append(one_decimal(row.average))
        body.append(cells)
    return header, body


def render_table(
    comparison: Comparison,
    fmt: str = "text",
    columns: tuple[str, ...] = ("acc",),
) -> str:
    """Render the comparison; column order is source, shifted, average."""
    if fmt not in FORMATS:
        raise ValidationError(f"format must be one of {FORMATS}, got {fmt!r}")
    for c in columns:
        if c not in COLUMN_KINDS:
            raise ValidationError(f"unknown column kind {c!r}, expected {COLUMN_KINDS}")
    if not columns:
        raise ValidationError("at least one column kind required")
    header, body = _header_and_rows(comparison, tuple(columns))
    if fmt == "csv":
        return _render_csv(header, body)
    if fmt == "md":
        return _render_md(header, body)
    return _render_text(header, body)


def _render_csv(header: list[str], body: list[list[str]]) -> str:
    import csv

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(body)
    return buf.getvalue()


def _render_md(header: list[str], body: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |"]
    lines.append("| " + " | ".join("---" for _ in header) + " |")
    for row in body:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def _render_text(header: list[str], body: list[list[str]]) -> str:
    widths = [len(h) for h in header]
    for row in body:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def line(cells: list[str]) -> str:
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()
    lines = [line(header), line(["-" * w for w in widths])]
    lines.extend(line(row) for row in body)
    return "\n".join(lines) + "\n"
