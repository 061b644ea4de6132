"""Dataset manifests: the sample pools that plans draw from.

On disk: a header object line {"kind": "dataset_manifest", "dataset_tag":
..., "origin": ...} followed by one entry object per line with fields
sample_id, class_id, uri.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatError, ValidationError
from .lineio import dumps, iter_records, require

ORIGINS = ("real", "generated")


@dataclass(frozen=True)
class ManifestEntry:
    sample_id: str
    class_id: int
    uri: str


@dataclass(frozen=True)
class DatasetManifest:
    """A named pool of samples with one origin.

    sample_ids are unique within the manifest; class ids are nonnegative
    and, when a catalog is supplied to the reader, resolvable in it.
    """

    dataset_tag: str
    origin: str
    entries: tuple[ManifestEntry, ...] = field(default=())

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValidationError(f"origin must be one of {ORIGINS}, got {self.origin!r}")
        seen = set()
        for e in self.entries:
            if not e.sample_id:
                raise ValidationError("sample ids must be nonempty")
            if e.sample_id in seen:
                raise ValidationError(f"duplicate sample id {e.sample_id!r}")
            seen.add(e.sample_id)
            if e.class_id < 0:
                raise ValidationError(f"entry {e.sample_id!r}: negative class id")

    def __len__(self) -> int:
        return len(self.entries)

    def by_class(self) -> dict[int, list[ManifestEntry]]:
        out: dict[int, list[ManifestEntry]] = {}
        for e in self.entries:
            out.setdefault(e.class_id, []).append(e)
        return out


def write_dataset_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps({
            "kind": "dataset_manifest",
            "dataset_tag": manifest.dataset_tag,
            "origin": manifest.origin,
        }))
        fh.write("\n")
        for e in manifest.entries:
            fh.write(dumps({"sample_id": e.sample_id, "class_id": e.class_id, "uri": e.uri}))
            fh.write("\n")


def read_dataset_manifest(path: str | Path, catalog=None) -> DatasetManifest:
    path = Path(path)
    header = None
    entries: list[ManifestEntry] = []
    for lineno, obj in iter_records(path):
        where = f"{path}:{lineno}"
        if header is None:
            if obj.get("kind") != "dataset_manifest":
                raise FormatError(f"{where}: first line must be a dataset_manifest header")
            header = obj
            continue
        sid = require(obj, "sample_id", where)
        cid = require(obj, "class_id", where)
        uri = require(obj, "uri", where)
        if not isinstance(cid, int) or isinstance(cid, bool):
            raise FormatError(f"{where}: class_id must be an integer")
        entries.append(ManifestEntry(str(sid), cid, str(uri)))
    if header is None:
        raise FormatError(f"{path}: empty manifest file, header line required")
    try:
        manifest = DatasetManifest(
            dataset_tag=str(require(header, "dataset_tag", f"{path}:1")),
            origin=str(require(header, "origin", f"{path}:1")),
            entries=tuple(entries),
        )
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if catalog is not None:
        for e in manifest.entries:
            if e.class_id not in catalog:
                raise FormatError(
                    f"{path}: entry {e.sample_id!r} has unknown class id {e.class_id}"
                )
    return manifest
