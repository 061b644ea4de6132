"""Class catalogs: the id/name table every other artifact refers to."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatError, ValidationError


@dataclass(frozen=True)
class ClassCatalog:
    """Ordered mapping of dense class ids to unique display names.

    Invariants: ids are exactly 0..K-1 (dense, unique), names are unique
    and nonempty. Instances are immutable once constructed.
    """

    names: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.names) == 0:
            raise ValidationError("catalog must contain at least one class")
        for cid, name in enumerate(self.names):
            if not isinstance(name, str) or name == "":
                raise ValidationError(f"class {cid}: name must be a nonempty string")
        if len(set(self.names)) != len(self.names):
            dupes = sorted({n for n in self.names if self.names.count(n) > 1})
            raise ValidationError(f"duplicate class names: {dupes}")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.names)})

    def __len__(self) -> int:
        return len(self.names)

    def name_of(self, class_id: int) -> str:
        if not 0 <= class_id < len(self.names):
            raise ValidationError(f"class id {class_id} out of range [0, {len(self.names)})")
        return self.names[class_id]

    def id_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValidationError(f"unknown class name: {name!r}") from None

    def __contains__(self, class_id: int) -> bool:
        return 0 <= class_id < len(self.names)


def read_catalog(path: str | Path) -> ClassCatalog:
    """Read a catalog from tab-separated 'class_id<TAB>class_name' lines.

    Ids must appear densely (0..K-1) though in any order; blank lines are
    ignored.
    """
    path = Path(path)
    rows: dict[int, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected 'class_id<TAB>class_name'")
            raw_id, name = parts
            try:
                cid = int(raw_id)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: class id {raw_id!r} is not an integer") from None
            if cid in rows:
                raise FormatError(f"{path}:{lineno}: duplicate class id {cid}")
            rows[cid] = name
    if not rows:
        raise FormatError(f"{path}: catalog file is empty")
    expected = set(range(len(rows)))
    if set(rows) != expected:
        raise FormatError(
            f"{path}: class ids must be dense 0..{len(rows) - 1}, got {sorted(rows)}"
        )
    return ClassCatalog(tuple(rows[i] for i in range(len(rows))))


def write_catalog(catalog: ClassCatalog, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for cid, name in enumerate(catalog.names):
            fh.write(f"{cid}\t{name}\n")
