"""Deterministic JSON rendering: sorted keys, floats at six significant digits."""

from __future__ import annotations

import json
from pathlib import Path

from .errors import IoFailure


def round_floats(value):
    if isinstance(value, float):
        return float(f"{value:.6g}")
    if isinstance(value, dict):
        return {key: round_floats(v) for key, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_floats(v) for v in value]
    return value


def dumps(value) -> str:
    return json.dumps(round_floats(value), sort_keys=True, indent=2) + "\n"


def dump(value, path: str | Path) -> None:
    try:
        Path(path).write_text(dumps(value), encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
