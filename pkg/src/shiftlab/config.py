"""Declarative run files.

A config file is a JSON or YAML mapping. For single subcommands it holds
option defaults (keys match option names, dashes or underscores); values
given on the command line always win. For `study run` it describes a whole
experiment; see the study schema in cli.py.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import FormatError


def load_config(path: str | Path) -> dict:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".yaml", ".yml"):
        import yaml

        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise FormatError(f"{path}: invalid YAML: {exc}") from exc
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON: {exc.msg} at line {exc.lineno}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise FormatError(f"{path}: config root must be a mapping")
    return {str(k).replace("-", "_"): v for k, v in data.items()}
