"""Similarity filtering of image embeddings against class captions.

An image is kept exactly when the cosine similarity between its embedding
and its class caption embedding is at or above the threshold; strictly
below removes. The comparison happens in float64 regardless of storage
precision. The rule is encoder-agnostic: captions may come from any text
encoder as long as image and caption sets share a dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingSet
from .errors import FormatError, ValidationError
from .lineio import dumps, iter_records, require

DEFAULT_THRESHOLD = 0.3
DEFAULT_CAPTION_TEMPLATE = "a photo of a {class label}"


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of the angle between two finite nonzero vectors, in float64."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValidationError(f"vectors must share one dimension, got {u.shape} and {v.shape}")
    if not (np.isfinite(u).all() and np.isfinite(v).all()):
        raise ValidationError("cosine similarity of non-finite vectors")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValidationError("cosine similarity of a zero vector is undefined")
    return float(u @ v) / (nu * nv)


@dataclass(frozen=True)
class FilterReport:
    """Outcome of one filtering pass.

    kept holds sample ids in input row order; removed holds (sample_id,
    similarity) in input row order. kept and removed partition the input.
    """

    threshold: float
    caption_template: str
    kept: tuple[str, ...] = field(default=())
    removed: tuple[tuple[str, float], ...] = field(default=())

    @property
    def kept_count(self) -> int:
        return len(self.kept)

    @property
    def removed_count(self) -> int:
        return len(self.removed)


def filter_by_caption(
    images: EmbeddingSet,
    captions: EmbeddingSet,
    threshold: float = DEFAULT_THRESHOLD,
    caption_template: str = DEFAULT_CAPTION_TEMPLATE,
) -> FilterReport:
    """Partition images by cosine similarity to their class caption.

    captions must hold exactly one row per class id referenced by images;
    a missing or duplicated caption class is an error naming the class.
    Zero-norm vectors are rejected naming the sample.
    """
    if images.dim != captions.dim:
        raise ValidationError(
            f"image dim {images.dim} does not match caption dim {captions.dim}"
        )
    caption_rows: dict[int, int] = {}
    for i, cid in enumerate(captions.class_ids):
        cid = int(cid)
        if cid in caption_rows:
            raise ValidationError(f"class {cid} has more than one caption row")
        caption_rows[cid] = i

    cap = np.asarray(captions.vectors, dtype=np.float64)
    cap_norms = np.linalg.norm(cap, axis=1)
    for cid, row in caption_rows.items():
        if cap_norms[row] == 0.0:
            raise ValidationError(
                f"caption for class {cid} ({captions.sample_ids[row]!r}) is a zero vector"
            )

    img = np.asarray(images.vectors, dtype=np.float64)
    img_norms = np.linalg.norm(img, axis=1)
    zero = np.nonzero(img_norms == 0.0)[0]
    if zero.size:
        raise ValidationError(f"image {images.sample_ids[int(zero[0])]!r} is a zero vector")

    rows = np.empty(len(images), dtype=np.int64)
    for i, sid in enumerate(images.sample_ids):
        cid = int(images.class_ids[i])
        if cid not in caption_rows:
            raise ValidationError(f"no caption row for class {cid} (image {sid!r})")
        rows[i] = caption_rows[cid]

    # one vectorized pass; per-row results do not depend on evaluation order
    sims = np.einsum("ij,ij->i", img, cap[rows]) / (img_norms * cap_norms[rows])
    kept: list[str] = []
    removed: list[tuple[str, float]] = []
    for i, sid in enumerate(images.sample_ids):
        if sims[i] >= threshold:
            kept.append(sid)
        else:
            removed.append((sid, float(sims[i])))
    return FilterReport(
        threshold=threshold,
        caption_template=caption_template,
        kept=tuple(kept),
        removed=tuple(removed),
    )


def write_filter_report(report: FilterReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps({
            "kind": "filter_report",
            "kept_count": report.kept_count,
            "removed_count": report.removed_count,
            "threshold": report.threshold,
            "caption_template": report.caption_template,
        }))
        fh.write("\n")
        for sid in report.kept:
            fh.write(dumps({"sample_id": sid, "status": "kept"}))
            fh.write("\n")
        for sid, sim in report.removed:
            fh.write(dumps({"sample_id": sid, "similarity": sim, "status": "removed"}))
            fh.write("\n")


def read_filter_report(path: str | Path) -> FilterReport:
    path = Path(path)
    header = None
    kept: list[str] = []
    removed: list[tuple[str, float]] = []
    for lineno, obj in iter_records(path):
        where = f"{path}:{lineno}"
        if header is None:
            if obj.get("kind") != "filter_report":
                raise FormatError(f"{where}: first line must be a filter_report header")
            header = obj
            continue
        status = str(require(obj, "status", where))
        sid = str(require(obj, "sample_id", where))
        if status == "kept":
            kept.append(sid)
        elif status == "removed":
            removed.append((sid, float(require(obj, "similarity", where))))
        else:
            raise FormatError(f"{where}: bad status {status!r}")
    if header is None:
        raise FormatError(f"{path}: empty filter report, header line required")
    report = FilterReport(
        threshold=float(require(header, "threshold", f"{path}:1")),
        caption_template=str(require(header, "caption_template", f"{path}:1")),
        kept=tuple(kept),
        removed=tuple(removed),
    )
    if report.kept_count != int(header.get("kept_count", report.kept_count)):
        raise FormatError(f"{path}: kept_count header disagrees with body")
    if report.removed_count != int(header.get("removed_count", report.removed_count)):
        raise FormatError(f"{path}: removed_count header disagrees with body")
    return report
