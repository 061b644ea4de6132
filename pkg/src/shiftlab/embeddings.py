"""Embedding sets and their on-disk interchange format.

Binary payload layout (all integers little-endian):

    offset  size  field
    0       4     magic, ASCII "GSEB"
    4       4     format version, u32, currently 1
    8       8     row count N, u64
    16      4     dimension D, u32
    20      1     dtype code, u8, 0 = float32
    21      3     reserved, must be zero
    24      N*D*4 row-major float32 vector data

A sidecar index sits next to the payload: line-delimited JSON, one object
per row in payload order with fields sample_id, class_id, dataset_tag and
modality. Unknown sidecar fields are ignored (one warning per file, with a
count) so downstream producers may attach extra per-row metadata without
breaking readers.

Vectors are stored as 32-bit floats; all metric arithmetic upcasts to
64-bit. Values are immutable in spirit: readers never hand out buffers
aliasing the file, and writers take sole ownership of their target paths.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError
from .lineio import dumps, iter_records, require

logger = logging.getLogger(__name__)

MAGIC = b"GSEB"
FORMAT_VERSION = 1
DTYPE_FLOAT32 = 0
_HEADER = struct.Struct("<4sIQIB3s")

MODALITIES = ("image", "text")


@dataclass
class EmbeddingSet:
    """N fixed-dimension vectors with row identities.

    Invariants (checked at construction): dim >= 1, vectors is an (N, dim)
    float32 array of finite values, sample_ids are unique nonempty strings,
    class_ids are nonnegative, modality is 'image' or 'text'.
    """

    dim: int
    sample_ids: tuple[str, ...]
    class_ids: np.ndarray
    vectors: np.ndarray
    dataset_tag: str
    modality: str = "image"

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"dim must be >= 1, got {self.dim}")
        if self.modality not in MODALITIES:
            raise ValidationError(f"modality must be one of {MODALITIES}, got {self.modality!r}")
        self.sample_ids = tuple(self.sample_ids)
        self.class_ids = np.asarray(self.class_ids, dtype=np.int64)
        self.vectors = np.asarray(self.vectors, dtype=np.float32)
        n = len(self.sample_ids)
        if self.vectors.shape != (n, self.dim):
            raise ValidationError(
                f"vectors shape {self.vectors.shape} does not match {n} rows x dim {self.dim}"
            )
        if self.class_ids.shape != (n,):
            raise ValidationError("class_ids length does not match sample_ids")
        if n and (self.class_ids < 0).any():
            bad = int(np.argmax(self.class_ids < 0))
            raise ValidationError(f"row {self.sample_ids[bad]!r}: negative class id")
        for sid in self.sample_ids:
            if not isinstance(sid, str) or sid == "":
                raise ValidationError("sample ids must be nonempty strings")
        if len(set(self.sample_ids)) != n:
            seen, dup = set(), None
            for sid in self.sample_ids:
                if sid in seen:
                    dup = sid
                    break
                seen.add(sid)
            raise ValidationError(f"duplicate sample id {dup!r}")
        if n and not np.isfinite(self.vectors).all():
            bad = int(np.argwhere(~np.isfinite(self.vectors))[0][0])
            raise ValidationError(f"row {self.sample_ids[bad]!r}: non-finite vector entry")

    def __len__(self) -> int:
        return len(self.sample_ids)

    def validate_against(self, catalog) -> None:
        """Check every class id resolves in the given ClassCatalog."""
        if len(self) == 0:
            return
        top = int(self.class_ids.max())
        if top >= len(catalog):
            bad = int(np.argmax(self.class_ids == self.class_ids.max()))
            raise ValidationError(
                f"row {self.sample_ids[bad]!r}: class id {top} not in catalog of {len(catalog)}"
            )


def write_embeddings(es: EmbeddingSet, payload_path: str | Path, index_path: str | Path | None = None) -> None:
    """Write the binary payload and its sidecar index.

    The index path defaults to payload_path + '.idx'. Non-finite values are
    rejected here as well as at construction, naming the offending row, so
    arrays mutated after construction cannot escape to disk.
    """
    payload_path = Path(payload_path)
    index_path = Path(index_path) if index_path is not None else _default_index_path(payload_path)
    n = len(es)
    if n and not np.isfinite(es.vectors).all():
        bad = int(np.argwhere(~np.isfinite(es.vectors))[0][0])
        raise ValidationError(f"row {es.sample_ids[bad]!r}: non-finite vector entry")
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, n, es.dim, DTYPE_FLOAT32, b"\x00\x00\x00")
    data = np.ascontiguousarray(es.vectors, dtype="<f4")
    with open(payload_path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())
    with open(index_path, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(n):
            fh.write(dumps({
                "sample_id": es.sample_ids[i],
                "class_id": int(es.class_ids[i]),
                "dataset_tag": es.dataset_tag,
                "modality": es.modality,
            }))
            fh.write("\n")


def read_embeddings(payload_path: str | Path, index_path: str | Path | None = None) -> EmbeddingSet:
    """Read a payload plus sidecar back into an EmbeddingSet.

    Failure modes are distinct: magic mismatch, unsupported version,
    unsupported dtype, truncated payload, row-count mismatch against the
    sidecar, and per-row validation errors.
    """
    payload_path = Path(payload_path)
    index_path = Path(index_path) if index_path is not None else _default_index_path(payload_path)

    with open(payload_path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise FormatError(f"{payload_path}: truncated header ({len(head)} bytes)")
        magic, version, n, dim, dtype_code, reserved = _HEADER.unpack(head)
        if magic != MAGIC:
            raise FormatError(f"{payload_path}: bad magic {magic!r}, expected {MAGIC!r}")
        if version != FORMAT_VERSION:
            raise FormatError(f"{payload_path}: unsupported format version {version}")
        if dtype_code != DTYPE_FLOAT32:
            raise FormatError(f"{payload_path}: unsupported dtype code {dtype_code}")
        if reserved != b"\x00\x00\x00":
            raise FormatError(f"{payload_path}: reserved header bytes must be zero")
        if dim < 1:
            raise FormatError(f"{payload_path}: dimension must be >= 1, got {dim}")
        expected = n * dim * 4
        available = payload_path.stat().st_size - _HEADER.size
        if available < expected:
            raise FormatError(
                f"{payload_path}: truncated payload, expected {expected} data bytes, got {available}"
            )
        if available > expected:
            raise FormatError(f"{payload_path}: trailing bytes after {n} rows")
        raw = fh.read(expected)
        if len(raw) != expected:
            raise FormatError(f"{payload_path}: truncated payload mid-read")
    vectors = np.frombuffer(raw, dtype="<f4").reshape(n, dim).copy()

    sample_ids: list[str] = []
    class_ids: list[int] = []
    tags: set[str] = set()
    modalities: set[str] = set()
    unknown_fields = 0
    for lineno, obj in iter_records(index_path):
        where = f"{index_path}:{lineno}"
        sid = require(obj, "sample_id", where)
        cid = require(obj, "class_id", where)
        tag = require(obj, "dataset_tag", where)
        modality = require(obj, "modality", where)
        if not isinstance(sid, str) or not isinstance(tag, str) or not isinstance(modality, str):
            raise FormatError(f"{where}: sample_id, dataset_tag and modality must be strings")
        if not isinstance(cid, int) or isinstance(cid, bool):
            raise FormatError(f"{where}: class_id must be an integer")
        extra = set(obj) - {"sample_id", "class_id", "dataset_tag", "modality"}
        unknown_fields += len(extra)
        sample_ids.append(sid)
        class_ids.append(cid)
        tags.add(tag)
        modalities.add(modality)
    if unknown_fields:
        logger.warning("%s: ignored %d unknown sidecar field(s)", index_path, unknown_fields)
    if len(sample_ids) != n:
        raise FormatError(
            f"{index_path}: sidecar has {len(sample_ids)} rows but payload declares {n}"
        )
    if len(tags) > 1:
        raise FormatError(f"{index_path}: mixed dataset tags {sorted(tags)}")
    if len(modalities) > 1:
        raise FormatError(f"{index_path}: mixed modalities {sorted(modalities)}")
    dataset_tag = tags.pop() if tags else ""
    modality = modalities.pop() if modalities else "image"
    try:
        return EmbeddingSet(
            dim=dim,
            sample_ids=sample_ids,
            class_ids=np.asarray(class_ids, dtype=np.int64),
            vectors=vectors,
            dataset_tag=dataset_tag,
            modality=modality,
        )
    except ValidationError as exc:
        raise FormatError(f"{payload_path}: {exc}") from exc


def _default_index_path(payload_path: Path) -> Path:
    return payload_path.with_name(payload_path.name + ".idx")
