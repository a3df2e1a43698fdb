"""Byte-stable JSON: sorted keys, fixed separators, trailing newline.

Every export (normalized specs, windows, reports, traces) goes through here so
that identical inputs give identical bytes.
"""

from __future__ import annotations

import json
from collections.abc import Iterable
from pathlib import Path
from typing import Any


def dumps(obj: Any, *, pretty: bool = True) -> str:
    if pretty:
        return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def dumps_lines(records: Iterable[Any]) -> str:
    return "".join(dumps(r, pretty=False) + "\n" for r in records)


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    # newline="" keeps "\n" on every platform
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)
