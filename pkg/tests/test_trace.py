"""Tests for trace files and the independent trace replay."""

from __future__ import annotations

import dataclasses
import json
import random

import pytest

from omegafactor.domain import TraceFormatError
from omegafactor.oracle.report import all_ok
from omegafactor.oracle.trace import check_acyclic, check_step_order, check_tables, replay, verify_trace
from omegafactor.oracle.unionfind import UnionFind, first_cycle_edge
from omegafactor.sim.model import (
    SimConfigFile,
    adequate_instance,
    build_config,
    random_instance,
    two_vertex_instance,
)
from omegafactor.sim.scheduler import EXHAUSTED, SimTrace, StepAction, StepRecord, run
from omegafactor.sim.trace import factors_json, parse_trace, read_trace, trace_text, write_trace

# ── trace files ──


def test_trace_file_layout(tmp_path):
    trace = run(two_vertex_instance())
    path = tmp_path / "out" / "trace.jsonl"
    write_trace(trace, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 6
    assert json.loads(lines[0])["kind"] == "header"
    assert json.loads(lines[2]) == {
        "kind": "step", "step": [0, 0, 1], "action": "assign", "j": 0, "y": 0,
        "sigma_before": 0, "sigma_after": 1, "conditions": [True] * 8,
    }
    assert json.loads(lines[-1]) == {"kind": "end", "steps": 4}
    loaded = read_trace(path)
    assert loaded.config == trace.config
    assert loaded.steps == trace.steps
    assert loaded.table is None


def test_truncated_and_malformed_traces():
    text = trace_text(run(two_vertex_instance()))
    lines = text.splitlines()
    with pytest.raises(TraceFormatError, match="empty trace"):
        parse_trace("")
    with pytest.raises(TraceFormatError, match="truncated trace"):
        parse_trace("\n".join(lines[:-1]))
    with pytest.raises(TraceFormatError, match="missing header"):
        parse_trace("\n".join(lines[1:]))
    with pytest.raises(TraceFormatError, match="not JSON"):
        parse_trace("\n".join([lines[0], "{oops", lines[-1]]))
    with pytest.raises(TraceFormatError, match="announces 4 steps"):
        parse_trace("\n".join([lines[0], *lines[1:3], lines[-1]]))
    short = json.loads(lines[1])
    short["conditions"] = short["conditions"][:7]
    with pytest.raises(TraceFormatError, match="bad step record"):
        parse_trace("\n".join([lines[0], json.dumps(short), lines[-1].replace("4", "1")]))


def test_read_trace_missing_file(tmp_path):
    with pytest.raises(TraceFormatError, match="cannot read"):
        read_trace(tmp_path / "missing.jsonl")


def test_factors_json():
    doc = json.loads(factors_json(run(two_vertex_instance())))
    assert doc == {"0": [[0, 1]], "1": []}


# ── replay ──


def test_live_traces_verify():
    for cfg in (two_vertex_instance(), adequate_instance(2, 2, 4)):
        reports = verify_trace(run(cfg))
        assert [r.check for r in reports] == ["step-order", "replay", "C1-C3", "acyclic"]
        assert all_ok(reports)


def test_replay_reports_the_first_forged_field():
    trace = run(adequate_instance(1, 3, 5))
    steps = list(trace.steps)
    steps[7] = dataclasses.replace(steps[7], sigma_before=5)
    report = replay(SimTrace(trace.config, steps))
    assert not report.ok
    assert report.counterexample["index"] == 7
    assert report.counterexample["field"] == "sigma_before"
    assert report.counterexample["logged"] == 5


def test_replay_catches_a_wrong_action():
    trace = run(two_vertex_instance())
    steps = list(trace.steps)
    steps[1] = dataclasses.replace(steps[1], action=StepAction.PUT_IN_B)
    report = replay(SimTrace(trace.config, steps))
    assert report.counterexample["field"] == "action"
    assert report.counterexample["expected"] == "assign"


def test_step_order_checks():
    trace = run(two_vertex_instance())
    swapped = [trace.steps[1], trace.steps[0], *trace.steps[2:]]
    assert not check_step_order(SimTrace(trace.config, swapped)).ok
    report = check_step_order(SimTrace(trace.config, trace.steps[:3]))
    assert "expected 4" in report.counterexample["reason"]
    exhausted = dataclasses.replace(trace.steps[0], sigma_after=EXHAUSTED)
    assert check_step_order(SimTrace(trace.config, [exhausted, *trace.steps[1:]])).ok


def _triangle_with_forged_steps() -> SimTrace:
    cfg = build_config(
        SimConfigFile(factors=1, passes=1, vertices=3, edges=[(0, 1), (0, 2), (1, 2)],
                      parents=[None, 0, 0])
    )
    ok = (True,) * 8
    steps = [
        StepRecord(0, 0, 1, StepAction.ASSIGN, 0, 0, 0, 1, ok),
        StepRecord(0, 0, 2, StepAction.ASSIGN, 0, 1, 1, 1, ok),
        StepRecord(0, 0, 2, StepAction.PUT_IN_B, 1, 0, 1, 1, ok),
    ]
    return SimTrace(cfg, steps)


def test_forged_placements_break_c2_and_acyclicity():
    trace = _triangle_with_forged_steps()
    tables = check_tables(trace)
    assert tables.counterexample == {"condition": "C2", "factor": 0, "vertex": 2, "under": [0, 1]}
    cyc = check_acyclic(trace)
    assert cyc.counterexample == {"factor": 0, "edge": [1, 2]}


def test_union_find():
    uf = UnionFind(5)
    assert uf.union(0, 1)
    assert uf.union(3, 4)
    assert not uf.union(1, 0)
    assert uf.is_same(0, 1)
    assert not uf.is_same(1, 3)
    assert first_cycle_edge(4, [(0, 1), (1, 2), (2, 3)]) is None
    assert first_cycle_edge(4, [(0, 1), (1, 2), (2, 0), (2, 3)]) == (2, 0)


@pytest.mark.parametrize("seed", range(50))
def test_fuzzed_runs_replay_cleanly(seed):
    rng = random.Random(seed)
    cfg = random_instance(
        rng,
        vertices=rng.randint(1, 200),
        factors=rng.randint(1, 4),
        passes=rng.randint(1, 6),
        extra_edges=rng.randint(0, 100),
        explicit_partition=rng.random() < 0.5,
    )
    trace = run(cfg)
    reports = verify_trace(trace)
    assert all_ok(reports), [r.to_dict() for r in reports if not r.ok]
    loaded = parse_trace(trace_text(trace))
    assert all_ok(verify_trace(loaded))


def test_replay_reports_are_repeatable():
    cfg = adequate_instance(2, 4)
    first = [r.to_dict() for r in verify_trace(run(cfg))]
    second = [r.to_dict() for r in verify_trace(parse_trace(trace_text(run(cfg))))]
    assert first == second
