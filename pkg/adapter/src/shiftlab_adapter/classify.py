"""Toy classifiers over the joint embedding space.

Two classifier specs are understood: "nearest-caption", which assigns
each image the class of its most similar caption embedding, and
"constant:<k>", which always predicts class k. Ties in the similarity
scores break toward the lowest class id.
"""

from __future__ import annotations

import numpy as np

from .errors import AdapterError


def parse_classifier(spec: str) -> tuple[str, int | None]:
    if spec == "nearest-caption":
        return "nearest-caption", None
    if spec.startswith("constant:"):
        token = spec[len("constant:"):]
        try:
            return "constant", int(token)
        except ValueError:
            raise AdapterError(f"constant classifier needs an integer class, got {token!r}") from None
    raise AdapterError(f"unknown classifier spec {spec!r}")


def check_label_space(labels, n_classes: int) -> None:
    for k in labels:
        if not 0 <= k < n_classes:
            raise AdapterError(
                f"classifier label space mismatch: class {k} not in the {n_classes}-class catalog"
            )


def _unit_rows(mat: np.ndarray, what: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.float64)
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise AdapterError(f"{what} contains a zero vector")
    return mat / norms


def nearest_caption(image_vectors, caption_vectors, caption_class_ids) -> list[int]:
    """Argmax cosine against the captions; exact ties pick the lowest class id."""
    imgs = np.asarray(image_vectors, dtype=np.float64)
    caps = np.asarray(caption_vectors, dtype=np.float64)
    class_ids = [int(c) for c in caption_class_ids]
    if caps.shape[0] != len(class_ids):
        raise AdapterError(f"{caps.shape[0]} captions for {len(class_ids)} class ids")
    if imgs.shape[1] != caps.shape[1]:
        raise AdapterError(
            f"image and caption dimensions differ: {imgs.shape[1]} vs {caps.shape[1]}"
        )
    # sort captions by class id so argmax's first-winner rule is the tie rule
    order = sorted(range(len(class_ids)), key=lambda i: class_ids[i])
    sims = _unit_rows(imgs, "image set") @ _unit_rows(caps[order], "caption set").T
    winners = np.argmax(sims, axis=1)
    return [class_ids[order[int(w)]] for w in winners]
