"""Deterministic toy encoders standing in for the pretrained pair.

A real deployment would call a neural joint image-text encoder. The
engine only ever sees unit vectors, so this module supplies a cheap
embedding with the properties the pipeline relies on: captions and
images land in one space, matching content scores high cosine, and
repeated calls are bit identical.

Text side: each word hashes to a fixed random unit anchor and a caption
embeds as the normalized sum of its word anchors, so captions sharing
words overlap and the class word supplies the separation. Image side:
the blue channel of a 64x64 rendering is reduced to 64 block means,
remapped from [0, 255] to [-1, 1], and normalized. The generator plants
conditioning vectors in exactly that channel, which is what makes the
two sides agree on synthetic images.
"""

from __future__ import annotations

import hashlib
import re
from functools import lru_cache
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import AdapterError

ENCODER_ID = "toy-bow-blue-v1"
EMBED_DIM = 64

# image geometry: 8x8 grid of 8x8 pixel blocks on a 64x64 canvas
SIDE = 64
GRID = 8

_WORD = re.compile(r"[a-z0-9]+")


@lru_cache(maxsize=4096)
def _anchor(word: str) -> np.ndarray:
    seed = int.from_bytes(hashlib.sha256(word.encode("utf-8")).digest()[:8], "big")
    v = np.random.default_rng(seed).standard_normal(EMBED_DIM)
    v /= np.linalg.norm(v)
    v.flags.writeable = False
    return v


def text_vector(text: str) -> np.ndarray:
    """Embed a caption as the normalized sum of its word anchors."""
    words = _WORD.findall(text.lower())
    if not words:
        raise AdapterError(f"caption has no encodable words: {text!r}")
    acc = np.zeros(EMBED_DIM)
    for word in words:
        acc += _anchor(word)
    norm = np.linalg.norm(acc)
    if norm == 0.0:
        raise AdapterError(f"caption embeds to the zero vector: {text!r}")
    return (acc / norm).astype(np.float32)


def image_vector(image: Image.Image) -> np.ndarray:
    """Embed an image from its blue-channel block means."""
    if image.size != (SIDE, SIDE):
        image = image.resize((SIDE, SIDE), Image.BILINEAR)
    blue = np.asarray(image.convert("RGB"), dtype=np.float64)[:, :, 2]
    block = SIDE // GRID
    means = blue.reshape(GRID, block, GRID, block).mean(axis=(1, 3)).reshape(EMBED_DIM)
    t = means / 127.5 - 1.0
    norm = np.linalg.norm(t)
    if norm == 0.0:
        raise AdapterError("image has no blue-channel signal")
    return (t / norm).astype(np.float32)


def load_image(path: str | Path) -> Image.Image:
    """Open and fully decode an image; decode errors surface here, not later."""
    img = Image.open(path)
    img.load()
    return img
