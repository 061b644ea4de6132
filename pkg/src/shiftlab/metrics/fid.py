"""Frechet distance between embedding distributions, per class and pooled.

For sample sets a and b with means mu_a, mu_b and unbiased covariances
Sigma_a, Sigma_b (divisor N - 1):

    d^2 = ||mu_a - mu_b||^2
        + tr(Sigma_a) + tr(Sigma_b)
        - 2 tr((Sigma_a^(1/2) Sigma_b Sigma_a^(1/2))^(1/2))

The matrix square roots are taken through symmetric eigendecompositions
only: Sigma_a^(1/2) from eigh of Sigma_a, and the trace term from eigh of
the symmetrized sandwich product. That product is PSD in exact arithmetic,
so numerically negative eigenvalues are rounding artifacts when small:
eigenvalues at or above -1e-10 times the largest eigenvalue are clamped to
zero, anything below that raises, because it signals a real conditioning
problem rather than rounding.

If either covariance is rank-deficient (smallest eigenvalue within 1e-12
of zero relative to the largest, or N - 1 < D), epsilon * I with epsilon
= 1e-6 is added to BOTH covariances and the computation reports
regularization_used. All arithmetic runs in float64 regardless of input
precision; the final value is clamped at zero.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

import numpy as np

from ..embeddings import EmbeddingSet
from ..errors import ValidationError

EPSILON = 1e-6
# relative floor below which a numerically negative eigenvalue is an error
_CLAMP_RTOL = 1e-10
# relative tolerance for calling a covariance rank-deficient
_RANK_RTOL = 1e-12

DEFAULT_MIN_PER_CLASS = 2


@dataclass(frozen=True)
class FidResult:
    """Class-averaged Frechet distance over a shared class set."""

    per_class: dict[int, float]
    mean: float
    n_classes: int
    regularization_used: bool
    skipped_classes: tuple[int, ...] = ()


def _eigh(matrix: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        return np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:
        raise ValidationError(f"eigendecomposition of {what} did not converge: {exc}") from exc


def _clamped(eigenvalues: np.ndarray, what: str) -> np.ndarray:
    top = float(eigenvalues.max()) if eigenvalues.size else 0.0
    floor = -_CLAMP_RTOL * max(top, 0.0)
    worst = float(eigenvalues.min()) if eigenvalues.size else 0.0
    if worst < floor:
        raise ValidationError(
            f"{what} has materially negative eigenvalue {worst:.3e} "
            f"(floor {floor:.3e}); inputs are not a valid covariance pairing"
        )
    return np.clip(eigenvalues, 0.0, None)


def _moments(rows: np.ndarray, side: str) -> tuple[np.ndarray, np.ndarray]:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise ValidationError(f"{side}: expected a 2-d sample array")
    n = rows.shape[0]
    if n < 2:
        raise ValidationError(f"{side}: need at least 2 samples for a covariance, got {n}")
    mu = rows.mean(axis=0)
    centered = rows - mu
    cov = centered.T @ centered / (n - 1)
    return mu, cov


def frechet_from_moments(
    mu_a: np.ndarray, cov_a: np.ndarray, mu_b: np.ndarray, cov_b: np.ndarray
) -> tuple[float, bool]:
    """Distance from first and second moments. Returns (value, regularized)."""
    mu_a = np.asarray(mu_a, dtype=np.float64)
    mu_b = np.asarray(mu_b, dtype=np.float64)
    cov_a = np.asarray(cov_a, dtype=np.float64)
    cov_b = np.asarray(cov_b, dtype=np.float64)

    vals_a, vecs_a = _eigh(cov_a, "first covariance")
    vals_b, _ = _eigh(cov_b, "second covariance")

    regularized = _needs_regularization(vals_a) or _needs_regularization(vals_b)
    if regularized:
        cov_a = cov_a + EPSILON * np.eye(cov_a.shape[0])
        cov_b = cov_b + EPSILON * np.eye(cov_b.shape[0])
        vals_a, vecs_a = _eigh(cov_a, "first covariance")

    vals_a = _clamped(vals_a, "first covariance")
    root_a = (vecs_a * np.sqrt(vals_a)) @ vecs_a.T

    sandwich = root_a @ cov_b @ root_a
    sandwich = 0.5 * (sandwich + sandwich.T)
    vals_s, _ = _eigh(sandwich, "sandwich product")
    vals_s = _clamped(vals_s, "sandwich product")
    trace_root = float(np.sqrt(vals_s).sum())

    diff = mu_a - mu_b
    value = float(diff @ diff) + float(np.trace(cov_a)) + float(np.trace(cov_b)) - 2.0 * trace_root
    return max(value, 0.0), regularized


def _needs_regularization(eigenvalues: np.ndarray) -> bool:
    top = float(eigenvalues.max())
    if top <= 0.0:
        return True
    return float(eigenvalues.min()) <= _RANK_RTOL * top


def fid(a: np.ndarray, b: np.ndarray) -> float:
    """Frechet distance between two sample arrays of shape (N, D)."""
    value, _ = fid_with_info(a, b)
    return value


def fid_with_info(a: np.ndarray, b: np.ndarray) -> tuple[float, bool]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValidationError(
            f"sample arrays must share a dimension, got {a.shape} and {b.shape}"
        )
    mu_a, cov_a = _moments(a, "first sample set")
    mu_b, cov_b = _moments(b, "second sample set")
    return frechet_from_moments(mu_a, cov_a, mu_b, cov_b)


def class_fid(
    x: EmbeddingSet,
    y: EmbeddingSet,
    min_per_class: int = DEFAULT_MIN_PER_CLASS,
    threads: int = 1,
) -> FidResult:
    """Unweighted mean of per-class distances over the shared class set.

    Classes with fewer than min_per_class rows on either side are skipped
    and reported, never silently averaged. Per-class work may run on a
    thread pool; results are merged in class id order so the outcome is
    identical for any thread count.
    """
    if x.dim != y.dim:
        raise ValidationError(f"embedding dims differ: {x.dim} vs {y.dim}")
    if min_per_class < 2:
        raise ValidationError("min_per_class must be >= 2, covariances need 2 samples")
    groups_x = _group_rows(x)
    groups_y = _group_rows(y)
    shared = sorted(set(groups_x) & set(groups_y))
    eligible: list[int] = []
    skipped: list[int] = []
    for cid in shared:
        if len(groups_x[cid]) >= min_per_class and len(groups_y[cid]) >= min_per_class:
            eligible.append(cid)
        else:
            skipped.append(cid)
    if not eligible:
        raise ValidationError(
            f"no class has at least {min_per_class} rows on both sides "
            f"(shared classes: {len(shared)})"
        )

    def one(cid: int) -> tuple[int, float, bool]:
        value, reg = fid_with_info(
            x.vectors[groups_x[cid]], y.vectors[groups_y[cid]]
        )
        return cid, value, reg

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, eligible))
    else:
        results = [one(cid) for cid in eligible]
    results.sort(key=lambda t: t[0])

    per_class = {cid: value for cid, value, _ in results}
    regularized = any(reg for _, _, reg in results)
    mean = float(np.mean([per_class[cid] for cid in eligible]))
    return FidResult(
        per_class=per_class,
        mean=mean,
        n_classes=len(eligible),
        regularization_used=regularized,
        skipped_classes=tuple(skipped),
    )


def _group_rows(es: EmbeddingSet) -> dict[int, np.ndarray]:
    """Row indices per class id, each block in original row order."""
    order = np.argsort(es.class_ids, kind="stable")
    sorted_ids = es.class_ids[order]
    boundaries = np.nonzero(np.diff(sorted_ids))[0] + 1
    return {
        int(es.class_ids[block[0]]): block
        for block in np.split(order, boundaries)
        if block.size
    }
