"""Intra-class diversity: one minus mean pairwise cosine similarity.

For each class, rows are normalized to unit length and the mean cosine is
taken over the n(n-1)/2 unordered distinct pairs; self-pairs never enter.
With unit rows the pair sum equals (||sum of rows||^2 - n) / 2, which is
what's computed, so the reduction is a fixed vectorized expression over
input row order and does not depend on thread count or chunking.

The value lies in [0, 2] for arbitrary embeddings and [0, 1] when
embeddings are nonnegative; identical rows give exactly 0. Normalizing
first makes the metric invariant to positive per-vector rescaling.
Float rounding can push the raw value a few ulp outside [0, 2], so the
per-class result is clamped to that mathematical range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..embeddings import EmbeddingSet
from ..errors import ValidationError
from .fid import _group_rows


@dataclass(frozen=True)
class DiversityResult:
    per_class: dict[int, float]
    mean: float


def pairwise_mean_cosine(vectors: np.ndarray) -> float:
    """Mean cosine over unordered distinct row pairs, float64."""
    v = np.asarray(vectors, dtype=np.float64)
    n = v.shape[0]
    if n < 2:
        raise ValidationError(f"need at least 2 vectors for pairwise similarity, got {n}")
    norms = np.linalg.norm(v, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise ValidationError(f"vector at row {int(zero[0])} has zero norm")
    unit = v / norms[:, None]
    total = unit.sum(axis=0)
    pair_sum = (float(total @ total) - n) / 2.0
    return pair_sum / (n * (n - 1) / 2.0)


def diversity(es: EmbeddingSet) -> DiversityResult:
    """Per-class diversity plus the unweighted mean over classes.

    Every class present must have at least two rows; classes that cannot
    form a pair are an error naming the class, not a silent skip.
    """
    if len(es) == 0:
        raise ValidationError("diversity of an empty embedding set")
    groups = _group_rows(es)
    per_class: dict[int, float] = {}
    for cid in sorted(groups):
        block = groups[cid]
        if block.size < 2:
            raise ValidationError(
                f"class {cid} has {block.size} row(s); diversity needs at least 2"
            )
        norms = np.linalg.norm(es.vectors[block].astype(np.float64), axis=1)
        zero = np.nonzero(norms == 0.0)[0]
        if zero.size:
            sid = es.sample_ids[int(block[int(zero[0])])]
            raise ValidationError(f"class {cid}: vector {sid!r} has zero norm")
        mean_cos = pairwise_mean_cosine(es.vectors[block])
        per_class[cid] = min(2.0, max(0.0, 1.0 - mean_cos))
    mean = float(np.mean([per_class[cid] for cid in sorted(per_class)]))
    return DiversityResult(per_class=per_class, mean=mean)
