"""Run provenance: who produced an output, from what, with which tool.

Every CLI run appends one record to provenance.jsonl in the output
directory. Records carry the subcommand, its arguments, sha256 digests of
the inputs, the produced paths, and the tool version. Timestamps live
only here, never inside hashed outputs, so reruns with identical inputs
rewrite outputs byte-identically while the log grows by one line.
"""

from __future__ import annotations

import datetime
import hashlib
from pathlib import Path

from .lineio import dumps


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def append_record(
    out_dir: str | Path,
    command: str,
    args: dict,
    inputs: list[str | Path],
    outputs: list[str | Path],
    version: str,
) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    record = {
        "tool": "shiftlab",
        "version": version,
        "command": command,
        "args": {k: _plain(v) for k, v in sorted(args.items())},
        "inputs": {str(p): file_digest(p) for p in inputs if p is not None},
        "outputs": [str(p) for p in outputs],
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }
    log_path = out_dir / "provenance.jsonl"
    with open(log_path, "a", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(record))
        fh.write("\n")
    return log_path


def _plain(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value
