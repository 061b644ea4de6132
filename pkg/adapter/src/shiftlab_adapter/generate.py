"""Procedural image synthesis driven by generation manifests.

Stands in for a diffusion pipeline. Each manifest row renders to a
64x64 RGB PNG named by its gen_id: the blue channel encodes the row's
conditioning vector (the prompt's caption embedding, the conditioning
image's embedding, or their normalized mean when the strategy uses
both) and the red and green channels carry noise drawn from the row
seed. Rerunning a manifest under one pipeline id reproduces every file
byte for byte.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .encoders import EMBED_DIM, GRID, SIDE, image_vector, load_image, text_vector
from .errors import AdapterError

PIPELINE_ID = "procedural-v1"


def plant(vector: np.ndarray) -> np.ndarray:
    """Spread a unit vector over the blue channel, one value per block."""
    v = np.asarray(vector, dtype=np.float64).reshape(EMBED_DIM)
    vals = np.clip(np.rint((v + 1.0) * 127.5), 0, 255).astype(np.uint8)
    block = SIDE // GRID
    grid = vals.reshape(GRID, GRID)
    return np.repeat(np.repeat(grid, block, axis=0), block, axis=1)


def render(vector: np.ndarray, seed: int) -> Image.Image:
    rng = np.random.default_rng(seed)
    arr = np.empty((SIDE, SIDE, 3), dtype=np.uint8)
    arr[:, :, :2] = rng.integers(0, 256, size=(SIDE, SIDE, 2), dtype=np.uint8)
    arr[:, :, 2] = plant(vector)
    return Image.fromarray(arr, "RGB")


def _conditioning_vector(row: dict, source_index: dict[str, Path] | None) -> np.ndarray:
    prompt = row.get("prompt")
    cond_id = row.get("conditioning_sample_id")
    parts = []
    if prompt is not None:
        parts.append(text_vector(str(prompt)).astype(np.float64))
    if cond_id is not None:
        if source_index is None:
            raise AdapterError("row conditions on an image but no source manifest was given")
        if cond_id not in source_index:
            raise AdapterError(f"conditioning sample {cond_id!r} not in the source manifest")
        parts.append(image_vector(load_image(source_index[cond_id])).astype(np.float64))
    if not parts:
        raise AdapterError("row has neither a prompt nor a conditioning image")
    acc = sum(parts)
    norm = np.linalg.norm(acc)
    if norm == 0.0:
        raise AdapterError("conditioning cancels to the zero vector")
    return acc / norm


def generate(rows, out_dir: str | Path,
             source_index: dict[str, Path] | None = None):
    """Render every manifest row into out_dir.

    Returns (entries, skips): entries as (gen_id, class_id, filename)
    in manifest row order, filenames relative to out_dir; skips as one
    dict per failed row with its gen_id and the reason. A failed row is
    recorded and skipped, never fatal.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries: list[tuple[str, int, str]] = []
    skips: list[dict] = []
    for row in rows:
        gen_id = row["gen_id"]
        try:
            vector = _conditioning_vector(row, source_index)
        except (AdapterError, OSError) as exc:
            skips.append({"gen_id": gen_id, "reason": str(exc)})
            continue
        name = f"{gen_id}.png"
        render(vector, row["seed"]).save(out_dir / name, format="PNG")
        entries.append((gen_id, row["class_id"], name))
    return entries, skips
