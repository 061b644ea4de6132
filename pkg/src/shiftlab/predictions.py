"""Classifier prediction logs.

On disk: line-delimited JSON, one object per record with fields
classifier_id, dataset_tag, sample_id, true_class, pred_class. The
classifier and dataset tags must agree across every line of a file.
Unknown fields are ignored with a counted warning; malformed lines and
duplicate sample ids are rejected with the offending line named.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatError, ValidationError
from .lineio import dumps, iter_records, require

logger = logging.getLogger(__name__)

_FIELDS = {"classifier_id", "dataset_tag", "sample_id", "true_class", "pred_class"}


@dataclass(frozen=True)
class PredictionLog:
    """Predictions of one classifier over one dataset.

    records holds (sample_id, true_class, pred_class) tuples with unique
    sample ids and nonnegative class ids.
    """

    classifier_id: str
    dataset_tag: str
    records: tuple[tuple[str, int, int], ...] = field(default=())

    def __post_init__(self):
        seen = set()
        for sid, true_class, pred_class in self.records:
            if not isinstance(sid, str) or sid == "":
                raise ValidationError("sample ids must be nonempty strings")
            if sid in seen:
                raise ValidationError(f"duplicate sample id {sid!r}")
            seen.add(sid)
            if true_class < 0 or pred_class < 0:
                raise ValidationError(f"record {sid!r}: class ids must be nonnegative")

    def __len__(self) -> int:
        return len(self.records)

    def validate_against(self, catalog) -> None:
        k = len(catalog)
        for sid, true_class, pred_class in self.records:
            if true_class >= k or pred_class >= k:
                raise ValidationError(
                    f"record {sid!r}: class id outside catalog of {k} classes"
                )


def write_prediction_log(log: PredictionLog, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sid, true_class, pred_class in log.records:
            fh.write(dumps({
                "classifier_id": log.classifier_id,
                "dataset_tag": log.dataset_tag,
                "sample_id": sid,
                "true_class": true_class,
                "pred_class": pred_class,
            }))
            fh.write("\n")


def read_prediction_log(path: str | Path) -> PredictionLog:
    path = Path(path)
    records: list[tuple[str, int, int]] = []
    seen: set[str] = set()
    classifier_ids: set[str] = set()
    tags: set[str] = set()
    unknown_fields = 0
    for lineno, obj in iter_records(path):
        where = f"{path}:{lineno}"
        sid = require(obj, "sample_id", where)
        true_class = require(obj, "true_class", where)
        pred_class = require(obj, "pred_class", where)
        classifier_ids.add(str(require(obj, "classifier_id", where)))
        tags.add(str(require(obj, "dataset_tag", where)))
        if not isinstance(sid, str):
            raise FormatError(f"{where}: sample_id must be a string")
        for name, value in (("true_class", true_class), ("pred_class", pred_class)):
            if not isinstance(value, int) or isinstance(value, bool):
                raise FormatError(f"{where}: {name} must be an integer")
        if sid in seen:
            raise FormatError(f"{where}: duplicate sample id {sid!r}")
        seen.add(sid)
        unknown_fields += len(set(obj) - _FIELDS)
        records.append((sid, true_class, pred_class))
    if unknown_fields:
        logger.warning("%s: ignored %d unknown field(s)", path, unknown_fields)
    if len(classifier_ids) > 1:
        raise FormatError(f"{path}: mixed classifier ids {sorted(classifier_ids)}")
    if len(tags) > 1:
        raise FormatError(f"{path}: mixed dataset tags {sorted(tags)}")
    try:
        return PredictionLog(
            classifier_id=classifier_ids.pop() if classifier_ids else "",
            dataset_tag=tags.pop() if tags else "",
            records=tuple(records),
        )
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc}") from exc
