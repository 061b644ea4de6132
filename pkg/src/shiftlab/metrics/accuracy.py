"""Top-1 accuracy and accuracy gaps, in percent."""

from __future__ import annotations

from collections.abc import Collection

from ..errors import ValidationError
from ..predictions import PredictionLog


def accuracy(log: PredictionLog, classes: Collection[int] | None = None) -> float:
    """Percent of records whose prediction equals the true class.

    classes, when given, restricts to records whose TRUE class is in the
    set; predictions landing outside the set stay in the denominator and
    count as wrong. An empty restriction is an error, not NaN.
    """
    if classes is not None:
        classes = set(classes)
        records = [r for r in log.records if r[1] in classes]
    else:
        records = list(log.records)
    if not records:
        raise ValidationError(
            f"no records to score for classifier {log.classifier_id!r} "
            f"on {log.dataset_tag!r} after restriction"
        )
    correct = sum(1 for _, true_class, pred_class in records if true_class == pred_class)
    return 100.0 * correct / len(records)


def accuracy_gap(shifted_accuracy: float, source_accuracy: float) -> float:
    """Shifted minus source accuracy; negative means degradation."""
    for name, value in (("shifted", shifted_accuracy), ("source", source_accuracy)):
        if not 0.0 <= value <= 100.0:
            raise ValidationError(f"{name} accuracy {value} outside [0, 100]")
    return shifted_accuracy - source_accuracy
