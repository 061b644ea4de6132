"""Baseline accuracy fits and effective robustness.

The baseline maps source-dataset accuracy to expected shifted-dataset
accuracy via ordinary least squares over a collection of conventionally
trained classifiers, on raw percent axes. Effective robustness of a
candidate is its shifted accuracy minus the baseline's prediction at its
source accuracy: positive means the candidate sits above the trend line.

By the least-squares normal equations the fit residuals sum to zero, so
the mean effective robustness of the fitting collection itself is zero up
to rounding; tests rely on this.

A transform hook is exposed for fitting on transformed axes (for example
logit), but the default is the identity and nothing in this package turns
it on.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from ..errors import FormatError, ValidationError
from ..lineio import dumps, iter_records, require


@dataclass(frozen=True)
class ClassifierPoint:
    """One classifier's (source accuracy, shifted accuracy) in percent."""

    classifier_id: str
    source_accuracy: float
    shifted_accuracy: float

    def __post_init__(self):
        for name, value in (("source", self.source_accuracy), ("shifted", self.shifted_accuracy)):
            if not 0.0 <= value <= 100.0:
                raise ValidationError(
                    f"{self.classifier_id!r}: {name} accuracy {value} outside [0, 100]"
                )


@dataclass(frozen=True)
class BaselineFit:
    slope: float
    intercept: float
    n_points: int
    residual_rms: float

    def predict(self, source_accuracy: float) -> float:
        return self.slope * source_accuracy + self.intercept


def fit_baseline(
    points: list[ClassifierPoint],
    transform: Callable[[float], float] | None = None,
) -> BaselineFit:
    """Least-squares line through (source, shifted) accuracy points.

    Requires at least two points and nonzero source-accuracy variance;
    the two failure modes raise distinct messages. residual_rms is the
    root mean square of vertical residuals (divisor n).
    """
    if len(points) < 2:
        raise ValidationError(f"baseline fit needs at least 2 points, got {len(points)}")
    x = np.array([p.source_accuracy for p in points], dtype=np.float64)
    y = np.array([p.shifted_accuracy for p in points], dtype=np.float64)
    if transform is not None:
        x = np.array([transform(v) for v in x], dtype=np.float64)
        y = np.array([transform(v) for v in y], dtype=np.float64)
    xm = x.mean()
    ym = y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0.0:
        raise ValidationError(
            "baseline fit is degenerate: all source accuracies are identical"
        )
    sxy = float(((x - xm) * (y - ym)).sum())
    slope = sxy / sxx
    intercept = ym - slope * xm
    residuals = y - (slope * x + intercept)
    rms = float(np.sqrt(np.mean(residuals ** 2)))
    return BaselineFit(slope=slope, intercept=intercept, n_points=len(points), residual_rms=rms)


def effective_robustness(point: ClassifierPoint, fit: BaselineFit) -> float:
    """Shifted accuracy above (positive) or below (negative) the baseline."""
    return point.shifted_accuracy - fit.predict(point.source_accuracy)


def write_zoo(points: list[ClassifierPoint], path: str | Path, dataset_tag: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in points:
            obj = {
                "classifier_id": p.classifier_id,
                "source_accuracy": p.source_accuracy,
                "shifted_accuracy": p.shifted_accuracy,
            }
            if dataset_tag:
                obj["dataset_tag"] = dataset_tag
            fh.write(dumps(obj))
            fh.write("\n")


def read_zoo(path: str | Path, dataset_tag: str | None = None) -> list[ClassifierPoint]:
    """Read classifier points, optionally keeping one dataset_tag only."""
    path = Path(path)
    points = []
    for lineno, obj in iter_records(path):
        where = f"{path}:{lineno}"
        if dataset_tag is not None and obj.get("dataset_tag", "") != dataset_tag:
            continue
        try:
            points.append(ClassifierPoint(
                classifier_id=str(require(obj, "classifier_id", where)),
                source_accuracy=float(require(obj, "source_accuracy", where)),
                shifted_accuracy=float(require(obj, "shifted_accuracy", where)),
            ))
        except ValidationError as exc:
            raise FormatError(f"{where}: {exc}") from exc
    return points


def read_zoo_by_dataset(path: str | Path) -> dict[str, list[ClassifierPoint]]:
    """Group a mixed zoo file by its dataset_tag field."""
    path = Path(path)
    zoos: dict[str, list[ClassifierPoint]] = {}
    for lineno, obj in iter_records(path):
        where = f"{path}:{lineno}"
        tag = str(obj.get("dataset_tag", ""))
        try:
            point = ClassifierPoint(
                classifier_id=str(require(obj, "classifier_id", where)),
                source_accuracy=float(require(obj, "source_accuracy", where)),
                shifted_accuracy=float(require(obj, "shifted_accuracy", where)),
            )
        except ValidationError as exc:
            raise FormatError(f"{where}: {exc}") from exc
        zoos.setdefault(tag, []).append(point)
    return zoos


def write_fit(fit: BaselineFit, path: str | Path, dataset_tag: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        obj = {
            "kind": "baseline_fit",
            "slope": fit.slope,
            "intercept": fit.intercept,
            "n_points": fit.n_points,
            "residual_rms": fit.residual_rms,
        }
        if dataset_tag:
            obj["dataset_tag"] = dataset_tag
        fh.write(dumps(obj))
        fh.write("\n")


def read_fit(path: str | Path) -> BaselineFit:
    path = Path(path)
    for _, obj in iter_records(path):
        if obj.get("kind") != "baseline_fit":
            raise FormatError(f"{path}: not a baseline_fit record")
        return BaselineFit(
            slope=float(require(obj, "slope", str(path))),
            intercept=float(require(obj, "intercept", str(path))),
            n_points=int(require(obj, "n_points", str(path))),
            residual_rms=float(require(obj, "residual_rms", str(path))),
        )
    raise FormatError(f"{path}: empty fit file")
