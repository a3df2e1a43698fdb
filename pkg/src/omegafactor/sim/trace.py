"""Trace files: JSON lines, compact and key-sorted.

  {"config": {...}, "kind": "header"}
  {"action": "assign", "conditions": [...], "j": 0, "kind": "step", ...}
  ...
  {"kind": "end", "steps": 4}

The trailer carries the step count so a cut-off file is detected.
"""

from __future__ import annotations

import json
from collections.abc import Iterator
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from omegafactor.domain import SimConfigError, TraceFormatError
from omegafactor.jsonio import dumps, dumps_lines, write_text
from omegafactor.sim.analysis import build_factors
from omegafactor.sim.model import SimConfigFile, build_config
from omegafactor.sim.scheduler import SimTrace, StepAction, StepRecord, sigma_from_json


class _StepLine(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["step"]
    step: tuple[int, int, int]
    action: StepAction
    j: int | None
    y: int | None
    sigma_before: int | str
    sigma_after: int | str
    conditions: list[bool] = Field(min_length=8, max_length=8)


def trace_records(trace: SimTrace) -> Iterator[dict[str, Any]]:
    yield {"kind": "header", "config": trace.config.to_json()}
    for s in trace.steps:
        yield s.to_json()
    yield {"kind": "end", "steps": len(trace.steps)}


def trace_text(trace: SimTrace) -> str:
    return dumps_lines(trace_records(trace))


def write_trace(trace: SimTrace, path: Path) -> None:
    write_text(path, trace_text(trace))


def _step(raw: dict[str, Any], lineno: int) -> StepRecord:
    try:
        line = _StepLine.model_validate(raw)
        before = sigma_from_json(line.sigma_before)
        after = sigma_from_json(line.sigma_after)
    except (ValidationError, ValueError) as e:
        raise TraceFormatError(f"line {lineno}: bad step record: {e}") from e
    m, tau, i = line.step
    return StepRecord(m, tau, i, line.action, line.j, line.y, before, after, tuple(line.conditions))


def parse_trace(text: str, *, max_vertices: int = 5000) -> SimTrace:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise TraceFormatError("empty trace")
    records: list[dict[str, Any]] = []
    for n, ln in enumerate(lines, start=1):
        try:
            rec = json.loads(ln)
        except json.JSONDecodeError as e:
            raise TraceFormatError(f"line {n}: not JSON: {e.msg}") from e
        if not isinstance(rec, dict):
            raise TraceFormatError(f"line {n}: expected an object")
        records.append(rec)

    head = records[0]
    if head.get("kind") != "header" or not isinstance(head.get("config"), dict):
        raise TraceFormatError("line 1: missing header record")
    try:
        cfg = build_config(SimConfigFile.model_validate(head["config"]), max_vertices=max_vertices)
    except (ValidationError, SimConfigError) as e:
        raise TraceFormatError(f"line 1: bad config in header: {e}") from e

    tail = records[-1]
    if tail.get("kind") != "end":
        raise TraceFormatError(f"truncated trace: no end record after line {len(records)}")
    steps = [_step(r, n) for n, r in enumerate(records[1:-1], start=2)]
    if tail.get("steps") != len(steps):
        raise TraceFormatError(
            f"end record announces {tail.get('steps')} steps, file holds {len(steps)}"
        )
    return SimTrace(cfg, steps)


def read_trace(path: Path, *, max_vertices: int = 5000) -> SimTrace:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise TraceFormatError(f"cannot read {path}: {e}") from e
    return parse_trace(text, max_vertices=max_vertices)


def factors_json(trace: SimTrace) -> str:
    """Factor edge lists as one JSON document."""
    return dumps(
        {
            str(m): sorted([min(a, b), max(a, b)] for a, b in g.edges)
            for m, g in enumerate(build_factors(trace))
        }
    )
