"""Interchange file writers and readers.

The adapter talks to the analytics engine only through files, so this
module mirrors the engine's on-disk contracts without importing it:
the GSEB embedding container with its JSONL sidecar, prediction logs,
dataset manifests, generation manifests, and the headerless class
catalog TSV. All writes go to a temp file in the target directory and
are renamed into place, so a concurrent reader never sees a partial
file.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

from .errors import AdapterError

GSEB_MAGIC = b"GSEB"
GSEB_VERSION = 1
# magic, version, row count, dim, dtype code (0 = float32), reserved
_GSEB_HEADER = struct.Struct("<4sIQIB3s")

SIDECAR_FIELDS = ("sample_id", "class_id", "dataset_tag", "modality")
PREDICTION_FIELDS = ("classifier_id", "dataset_tag", "sample_id", "true_class", "pred_class")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    try:
        tmp.write_bytes(data)
        os.replace(tmp, path)
    finally:
        tmp.unlink(missing_ok=True)


def write_jsonl(path: str | Path, rows) -> None:
    text = "".join(dumps(row) + "\n" for row in rows)
    _atomic_write(Path(path), text.encode("utf-8"))


def _iter_jsonl(path: Path):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AdapterError(f"{path}:{lineno}: not valid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise AdapterError(f"{path}:{lineno}: expected an object")
            yield lineno, obj


def _field(obj: dict, key: str, where: str):
    if key not in obj:
        raise AdapterError(f"{where}: missing field {key!r}")
    return obj[key]


def write_embeddings(payload_path: str | Path, vectors, rows, *, encoder: str) -> None:
    """Write a GSEB payload plus its sidecar.

    vectors is an (N, D) float array; rows supplies one dict per vector
    with the sample_id/class_id/dataset_tag/modality fields. The encoder
    identity is stamped into every sidecar line so downstream metrics
    can tell embedding spaces apart.
    """
    payload_path = Path(payload_path)
    mat = np.ascontiguousarray(np.asarray(vectors), dtype=np.float32)
    if mat.ndim != 2:
        raise AdapterError(f"vectors must be 2-dimensional, got shape {mat.shape}")
    rows = list(rows)
    if len(rows) != mat.shape[0]:
        raise AdapterError(f"{len(rows)} sidecar rows for {mat.shape[0]} vectors")
    lines = []
    for i, row in enumerate(rows):
        for key in SIDECAR_FIELDS:
            if key not in row:
                raise AdapterError(f"sidecar row {i}: missing field {key!r}")
        lines.append(dumps({**row, "encoder": encoder}))
    header = _GSEB_HEADER.pack(GSEB_MAGIC, GSEB_VERSION, mat.shape[0], mat.shape[1], 0, b"\x00\x00\x00")
    _atomic_write(payload_path, header + mat.tobytes())
    sidecar = payload_path.with_name(payload_path.name + ".idx")
    _atomic_write(sidecar, ("".join(line + "\n" for line in lines)).encode("utf-8"))


def write_prediction_log(path: str | Path, classifier_id: str, dataset_tag: str, records) -> None:
    """records holds (sample_id, true_class, pred_class) triples in output order."""
    rows = []
    for sid, true_class, pred_class in records:
        rows.append({
            "classifier_id": classifier_id,
            "dataset_tag": dataset_tag,
            "sample_id": sid,
            "true_class": int(true_class),
            "pred_class": int(pred_class),
        })
    write_jsonl(path, rows)


def write_dataset_manifest(path: str | Path, dataset_tag: str, origin: str,
                           entries, *, pipeline: str | None = None) -> None:
    """entries holds (sample_id, class_id, uri) triples.

    The optional pipeline id rides in the header; the engine ignores
    header fields it does not know.
    """
    header = {"kind": "dataset_manifest", "dataset_tag": dataset_tag, "origin": origin}
    if pipeline is not None:
        header["pipeline"] = pipeline
    rows = [header]
    for sid, cid, uri in entries:
        rows.append({"sample_id": sid, "class_id": int(cid), "uri": uri})
    write_jsonl(path, rows)


def read_dataset_manifest(path: str | Path) -> tuple[dict, list[tuple[str, int, str]]]:
    """Return (header, entries) with entries as (sample_id, class_id, uri)."""
    path = Path(path)
    header = None
    entries: list[tuple[str, int, str]] = []
    for lineno, obj in _iter_jsonl(path):
        where = f"{path}:{lineno}"
        if header is None:
            if obj.get("kind") != "dataset_manifest":
                raise AdapterError(f"{where}: first line must be a dataset_manifest header")
            _field(obj, "dataset_tag", where)
            _field(obj, "origin", where)
            header = obj
            continue
        sid = str(_field(obj, "sample_id", where))
        cid = _field(obj, "class_id", where)
        uri = str(_field(obj, "uri", where))
        if not isinstance(cid, int) or isinstance(cid, bool):
            raise AdapterError(f"{where}: class_id must be an integer")
        entries.append((sid, cid, uri))
    if header is None:
        raise AdapterError(f"{path}: empty manifest file, header line required")
    return header, entries


def read_generation_manifest(path: str | Path) -> list[dict]:
    """Return the manifest rows, validated but otherwise untouched.

    The generator honors each row's seed and ids as written, so no
    normalization happens here; rows keep their original order.
    """
    path = Path(path)
    rows: list[dict] = []
    seen: set[str] = set()
    for lineno, obj in _iter_jsonl(path):
        where = f"{path}:{lineno}"
        gen_id = str(_field(obj, "gen_id", where))
        if gen_id in seen:
            raise AdapterError(f"{where}: duplicate gen_id {gen_id!r}")
        seen.add(gen_id)
        cid = _field(obj, "class_id", where)
        if not isinstance(cid, int) or isinstance(cid, bool):
            raise AdapterError(f"{where}: class_id must be an integer")
        seed = _field(obj, "seed", where)
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise AdapterError(f"{where}: seed must be a nonnegative integer")
        for key in ("generator", "strategy"):
            _field(obj, key, where)
        _field(obj, "replica_index", where)
        rows.append(obj)
    return rows


def read_catalog(path: str | Path) -> list[str]:
    """Read a headerless id<TAB>name TSV into a name list indexed by id."""
    path = Path(path)
    pairs: dict[int, str] = {}
    names: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise AdapterError(f"{path}:{lineno}: expected id<TAB>name, got {len(parts)} fields")
            try:
                cid = int(parts[0])
            except ValueError:
                raise AdapterError(f"{path}:{lineno}: class id {parts[0]!r} is not an integer") from None
            name = parts[1].strip()
            if not name:
                raise AdapterError(f"{path}:{lineno}: empty class name")
            if cid in pairs:
                raise AdapterError(f"{path}:{lineno}: duplicate class id {cid}")
            if name in names:
                raise AdapterError(f"{path}:{lineno}: duplicate class name {name!r}")
            pairs[cid] = name
            names.add(name)
    if not pairs:
        raise AdapterError(f"{path}: empty catalog")
    if sorted(pairs) != list(range(len(pairs))):
        raise AdapterError(f"{path}: class ids must be dense from 0 to {len(pairs) - 1}")
    return [pairs[cid] for cid in range(len(pairs))]


def resolve_uri(uri: str, base_dir: str | Path) -> Path:
    """Resolve a manifest uri to a local path, relative uris against base_dir."""
    if uri.startswith("file://"):
        rest = uri[len("file://"):]
        p = Path(rest)
    else:
        p = Path(uri)
    if p.is_absolute():
        return p
    return Path(base_dir) / p
