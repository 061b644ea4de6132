"""Cross-dataset evaluation: overlap maps, restricted accuracy, comparisons.

Datasets with different label spaces are compared on the classes they
share. An overlap map pairs class ids across two catalogs; the default
construction matches on normalized names (lowercase, trimmed, internal
whitespace collapsed, normalizer version "v1") and refuses catalogs where
normalization makes two names collide. Curated two-column map files are
the escape hatch for catalogs that need manual correspondence.

Restricted accuracy keeps records whose true class is in the overlap; a
prediction outside the overlap cannot equal a true class inside it, so
such predictions count as wrong while staying in the denominator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .catalog import ClassCatalog
from .errors import FormatError, ValidationError
from .lineio import dumps, iter_records, require
from .metrics.accuracy import accuracy, accuracy_gap
from .metrics.baseline import BaselineFit, ClassifierPoint, effective_robustness, fit_baseline
from .predictions import PredictionLog

NORMALIZER_VERSION = "v1"


def normalize_name(name: str) -> str:
    """Lowercase, trim, collapse internal whitespace runs to single spaces."""
    return " ".join(name.strip().lower().split())


@dataclass(frozen=True)
class OverlapMap:
    """A bijection between subsets of two catalogs' class ids."""

    source_tag: str
    target_tag: str
    pairs: tuple[tuple[int, int], ...]
    unmatched_source: tuple[int, ...] = ()
    unmatched_target: tuple[int, ...] = ()

    def __post_init__(self):
        src = [s for s, _ in self.pairs]
        tgt = [t for _, t in self.pairs]
        if len(set(src)) != len(src) or len(set(tgt)) != len(tgt):
            raise ValidationError("overlap pairs must be a bijection, found a repeated id")

    def __len__(self) -> int:
        return len(self.pairs)

    def source_ids(self) -> set[int]:
        return {s for s, _ in self.pairs}

    def target_ids(self) -> set[int]:
        return {t for _, t in self.pairs}


def build_overlap(
    source_catalog: ClassCatalog,
    target_catalog: ClassCatalog,
    source_tag: str = "source",
    target_tag: str = "target",
) -> OverlapMap:
    """Match classes whose normalized names are equal.

    Raises when normalization maps two names of one catalog onto the same
    string; that ambiguity must be resolved with an explicit map file.
    """
    norm_source = _normalized_index(source_catalog, source_tag)
    norm_target = _normalized_index(target_catalog, target_tag)
    pairs = []
    for name, sid in sorted(norm_source.items()):
        tid = norm_target.get(name)
        if tid is not None:
            pairs.append((sid, tid))
    pairs.sort()
    matched_source = {s for s, _ in pairs}
    matched_target = {t for _, t in pairs}
    return OverlapMap(
        source_tag=source_tag,
        target_tag=target_tag,
        pairs=tuple(pairs),
        unmatched_source=tuple(
            cid for cid in range(len(source_catalog)) if cid not in matched_source
        ),
        unmatched_target=tuple(
            cid for cid in range(len(target_catalog)) if cid not in matched_target
        ),
    )


def _normalized_index(catalog: ClassCatalog, tag: str) -> dict[str, int]:
    index: dict[str, int] = {}
    for cid, name in enumerate(catalog.names):
        norm = normalize_name(name)
        if norm in index:
            raise ValidationError(
                f"catalog {tag!r}: names {catalog.names[index[norm]]!r} and {name!r} "
                f"collide after normalization ({norm!r}); supply an explicit map file"
            )
        index[norm] = cid
    return index


def write_overlap(overlap: OverlapMap, path: str | Path) -> None:
    """Two tab-separated id columns; a comment header records the tags."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"# overlap source_tag={overlap.source_tag} target_tag={overlap.target_tag} "
            f"normalizer={NORMALIZER_VERSION}\n"
        )
        for sid, tid in overlap.pairs:
            fh.write(f"{sid}\t{tid}\n")


def read_overlap(path: str | Path, source_tag: str = "", target_tag: str = "") -> OverlapMap:
    """Read a two-column map file; '#' lines are comments.

    Tags default to values parsed from the comment header when present.
    """
    path = Path(path)
    pairs: list[tuple[int, int]] = []
    header_tags = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.lstrip().startswith("#"):
                for token in line.lstrip("# ").split():
                    if "=" in token:
                        key, value = token.split("=", 1)
                        header_tags[key] = value
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected two tab-separated class ids")
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise FormatError(f"{path}:{lineno}: class ids must be integers") from None
    try:
        return OverlapMap(
            source_tag=source_tag or header_tags.get("source_tag", "source"),
            target_tag=target_tag or header_tags.get("target_tag", "target"),
            pairs=tuple(pairs),
        )
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def restricted_accuracy(log: PredictionLog, overlap: OverlapMap, side: str = "auto") -> float:
    """Accuracy over records whose true class is in the overlap.

    side selects which catalog's ids the log uses: "source", "target", or
    "auto" to match the log's dataset_tag against the overlap's tags.
    """
    if side == "auto":
        if log.dataset_tag == overlap.source_tag:
            side = "source"
        elif log.dataset_tag == overlap.target_tag:
            side = "target"
        else:
            raise ValidationError(
                f"log dataset_tag {log.dataset_tag!r} matches neither overlap side "
                f"({overlap.source_tag!r}, {overlap.target_tag!r}); pass side explicitly"
            )
    if side == "source":
        keep = overlap.source_ids()
    elif side == "target":
        keep = overlap.target_ids()
    else:
        raise ValidationError(f"side must be source, target or auto, got {side!r}")
    return accuracy(log, classes=keep)


@dataclass(frozen=True)
class EvalRow:
    """One training recipe's accuracies across datasets.

    per_dataset maps dataset_tag to percent accuracy and must include the
    source dataset. average is the unweighted mean over per_dataset values,
    excluding the source unless include_source_in_average.
    """

    classifier_id: str
    training_recipe: str
    source_tag: str
    per_dataset: dict[str, float]
    include_source_in_average: bool
    average: float

    def __post_init__(self):
        if self.source_tag not in self.per_dataset:
            raise ValidationError(
                f"row {self.training_recipe!r}: missing source dataset "
                f"{self.source_tag!r} in per_dataset"
            )
        expected = _row_average(self.per_dataset, self.source_tag, self.include_source_in_average)
        if self.average != expected:
            raise ValidationError(
                f"row {self.training_recipe!r}: stored average {self.average!r} "
                f"does not recompute from cells ({expected!r})"
            )


def _row_average(per_dataset: dict[str, float], source_tag: str, include_source: bool) -> float:
    values = [v for tag, v in sorted(per_dataset.items()) if include_source or tag != source_tag]
    if not values:
        raise ValidationError("no datasets to average over")
    return sum(values) / len(values)


def make_eval_row(
    classifier_id: str,
    training_recipe: str,
    source_tag: str,
    per_dataset: dict[str, float],
    include_source_in_average: bool = True,
) -> EvalRow:
    return EvalRow(
        classifier_id=classifier_id,
        training_recipe=training_recipe,
        source_tag=source_tag,
        per_dataset=dict(per_dataset),
        include_source_in_average=include_source_in_average,
        average=_row_average(per_dataset, source_tag, include_source_in_average),
    )


@dataclass(frozen=True)
class ShiftCell:
    accuracy: float
    gap: float
    er: float | None


@dataclass(frozen=True)
class ComparisonRow:
    classifier_id: str
    training_recipe: str
    source_accuracy: float
    cells: dict[str, ShiftCell]
    average: float
    include_source_in_average: bool


@dataclass(frozen=True)
class Comparison:
    """Recipes x datasets table with gap and robustness columns.

    Column order is fixed: source dataset first, shifted datasets in
    declared order, average last; renderers must not reorder.
    """

    source_tag: str
    shifted_order: tuple[str, ...]
    rows: tuple[ComparisonRow, ...]
    fits: dict[str, BaselineFit] = field(default_factory=dict)


def compare_recipes(
    rows: list[EvalRow],
    zoos: dict[str, list[ClassifierPoint]] | None = None,
    shifted_order: list[str] | None = None,
) -> Comparison:
    """Assemble the comparison table for a set of eval rows.

    zoos maps shifted dataset tags to baseline collections; tags without a
    zoo get no robustness column value. All rows must share one source tag
    and one dataset set. Empty input produces an empty table.
    """
    zoos = zoos or {}
    if not rows:
        return Comparison(source_tag="", shifted_order=(), rows=())
    source_tags = {r.source_tag for r in rows}
    if len(source_tags) > 1:
        raise ValidationError(f"rows disagree on source dataset: {sorted(source_tags)}")
    source_tag = source_tags.pop()
    if shifted_order is None:
        shifted_order = [t for t in rows[0].per_dataset if t != source_tag]
    for row in rows:
        missing = (set(shifted_order) | {source_tag}) - set(row.per_dataset)
        if missing:
            raise ValidationError(
                f"row {row.training_recipe!r}: missing datasets {sorted(missing)}"
            )

    fits: dict[str, BaselineFit] = {}
    for tag in shifted_order:
        if tag in zoos:
            fits[tag] = fit_baseline(zoos[tag])

    out_rows = []
    for row in rows:
        src_acc = row.per_dataset[source_tag]
        cells: dict[str, ShiftCell] = {}
        for tag in shifted_order:
            acc = row.per_dataset[tag]
            er = None
            if tag in fits:
                point = ClassifierPoint(
                    classifier_id=row.classifier_id,
                    source_accuracy=src_acc,
                    shifted_accuracy=acc,
                )
                er = effective_robustness(point, fits[tag])
            cells[tag] = ShiftCell(accuracy=acc, gap=accuracy_gap(acc, src_acc), er=er)
        out_rows.append(ComparisonRow(
            classifier_id=row.classifier_id,
            training_recipe=row.training_recipe,
            source_accuracy=src_acc,
            cells=cells,
            average=row.average,
            include_source_in_average=row.include_source_in_average,
        ))
    return Comparison(
        source_tag=source_tag,
        shifted_order=tuple(shifted_order),
        rows=tuple(out_rows),
        fits=fits,
    )


def write_eval_rows(rows: list[EvalRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(dumps({
                "classifier_id": row.classifier_id,
                "training_recipe": row.training_recipe,
                "source_tag": row.source_tag,
                "per_dataset": row.per_dataset,
                "include_source_in_average": row.include_source_in_average,
                "average": row.average,
            }))
            fh.write("\n")


def read_eval_rows(path: str | Path) -> list[EvalRow]:
    path = Path(path)
    rows = []
    for lineno, obj in iter_records(path):
        where = f"{path}:{lineno}"
        per_dataset = require(obj, "per_dataset", where)
        if not isinstance(per_dataset, dict):
            raise FormatError(f"{where}: per_dataset must be an object")
        try:
            row = make_eval_row(
                classifier_id=str(require(obj, "classifier_id", where)),
                training_recipe=str(require(obj, "training_recipe", where)),
                source_tag=str(require(obj, "source_tag", where)),
                per_dataset={str(k): float(v) for k, v in per_dataset.items()},
                include_source_in_average=bool(obj.get("include_source_in_average", True)),
            )
        except ValidationError as exc:
            raise FormatError(f"{where}: {exc}") from exc
        if "average" in obj and float(obj["average"]) != row.average:
            raise FormatError(
                f"{where}: stored average {obj['average']} does not recompute from cells"
            )
        rows.append(row)
    return rows


def write_comparison(comparison: Comparison, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps({
            "kind": "comparison",
            "source_tag": comparison.source_tag,
            "shifted_order": list(comparison.shifted_order),
            "fits": {
                tag: {
                    "slope": fit.slope,
                    "intercept": fit.intercept,
                    "n_points": fit.n_points,
                    "residual_rms": fit.residual_rms,
                }
                for tag, fit in sorted(comparison.fits.items())
            },
        }))
        fh.write("\n")
        for row in comparison.rows:
            fh.write(dumps({
                "classifier_id": row.classifier_id,
                "training_recipe": row.training_recipe,
                "source_accuracy": row.source_accuracy,
                "cells": {
                    tag: {"accuracy": c.accuracy, "gap": c.gap, "er": c.er}
                    for tag, c in row.cells.items()
                },
                "average": row.average,
                "include_source_in_average": row.include_source_in_average,
            }))
            fh.write("\n")


def read_comparison(path: str | Path) -> Comparison:
    path = Path(path)
    header = None
    rows: list[ComparisonRow] = []
    for lineno, obj in iter_records(path):
        where = f"{path}:{lineno}"
        if header is None:
            if obj.get("kind") != "comparison":
                raise FormatError(f"{where}: first line must be a comparison header")
            header = obj
            continue
        cells_obj = require(obj, "cells", where)
        cells = {
            str(tag): ShiftCell(
                accuracy=float(cell["accuracy"]),
                gap=float(cell["gap"]),
                er=None if cell.get("er") is None else float(cell["er"]),
            )
            for tag, cell in cells_obj.items()
        }
        rows.append(ComparisonRow(
            classifier_id=str(require(obj, "classifier_id", where)),
            training_recipe=str(require(obj, "training_recipe", where)),
            source_accuracy=float(require(obj, "source_accuracy", where)),
            cells=cells,
            average=float(require(obj, "average", where)),
            include_source_in_average=bool(obj.get("include_source_in_average", True)),
        ))
    if header is None:
        raise FormatError(f"{path}: empty comparison file, header line required")
    fits = {
        str(tag): BaselineFit(
            slope=float(f["slope"]),
            intercept=float(f["intercept"]),
            n_points=int(f["n_points"]),
            residual_rms=float(f["residual_rms"]),
        )
        for tag, f in header.get("fits", {}).items()
    }
    return Comparison(
        source_tag=str(require(header, "source_tag", f"{path}:1")),
        shifted_order=tuple(str(t) for t in require(header, "shifted_order", f"{path}:1")),
        rows=tuple(rows),
        fits=fits,
    )
