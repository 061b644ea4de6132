"""Line-delimited JSON helpers used by every text artifact.

Serialization is canonical (sorted keys, compact separators, UTF-8, raw
unicode) so that rewriting the same values always produces the same bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import FormatError


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def iter_records(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, object) for each nonblank line, 1-based.

    Raises FormatError naming the file and line for anything that is not a
    JSON object.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: malformed line: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise FormatError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def write_lines(path: str | Path, objs: Iterable[Any]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for obj in objs:
            fh.write(dumps(obj))
            fh.write("\n")


def require(obj: dict, field: str, where: str):
    if field not in obj:
        raise FormatError(f"{where}: missing required field '{field}'")
    return obj[field]
