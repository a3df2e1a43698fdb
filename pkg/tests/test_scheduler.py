"""Tests for the finite forest scheduler and trace analysis."""

from __future__ import annotations

import dataclasses
import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omegafactor.domain import SimulationInvariantError
from omegafactor.sim.analysis import (
    build_factors,
    check_C,
    factors_to_dot,
    is_acyclic,
    sigma_progress,
    summary,
)
from omegafactor.sim.model import adequate_instance, is_adequate, random_instance, two_vertex_instance
from omegafactor.sim.scheduler import (
    EXHAUSTED,
    SlotTable,
    StepAction,
    evaluate_at,
    run,
    sigma_from_json,
    sigma_json,
)
from omegafactor.sim.trace import trace_text

T, F = True, False


# ── slot tables ──


def test_sigma_of_fresh_and_partial_tables():
    table = SlotTable(1, 3)
    assert table.sigma(0) == 0
    table.set_slot(0, 0, [1])
    assert table.sigma(0) == 1
    assert table.fill(0, 0) == 1
    assert table.slot(0, 0, 0) == 1
    assert table.slot(0, 0, 1) is None


def test_sigma_exhausted_when_every_column_is_full():
    table = SlotTable(1, 2)
    table.set_slot(0, 0, [0, 1])
    table.set_slot(0, 1, [0, 1])
    assert table.sigma(0) is EXHAUSTED
    assert sigma_json(EXHAUSTED) == "exhausted"
    assert sigma_from_json("exhausted") is EXHAUSTED
    with pytest.raises(ValueError):
        sigma_from_json(-1)


def test_assign_must_fill_without_gaps():
    table = SlotTable(1, 4)
    table.assign(0, 0, 0, 1)
    with pytest.raises(SimulationInvariantError, match="gap-free"):
        table.assign(0, 0, 2, 2)


def test_double_placement_is_refused():
    table = SlotTable(2, 4)
    table.assign(0, 0, 0, 2)
    with pytest.raises(SimulationInvariantError, match="placed twice"):
        table.put_in_b(0, 1, 2)
    with pytest.raises(SimulationInvariantError, match="factors 0 and 1"):
        table.assign(1, 0, 0, 2)
    table.put_in_b(1, 1, 2)
    assert table.c_set(1, 1) == [2]
    assert table.in_b(1, 1, 2)
    assert list(table.c_sets(0)) == [(0, [2])]


# ── the two-vertex run ──


def test_two_vertex_trace():
    trace = run(two_vertex_instance())
    steps = [(s.key.as_list(), s.action, s.j, s.y, s.sigma_before, s.sigma_after) for s in trace.steps]
    assert steps == [
        ([0, 0, 0], StepAction.SKIP, None, None, 0, 0),
        ([0, 0, 1], StepAction.ASSIGN, 0, 0, 0, 1),
        ([1, 0, 0], StepAction.SKIP, None, None, 0, 0),
        ([1, 0, 1], StepAction.SKIP, 0, 0, 0, 0),
    ]
    assert trace.steps[0].conditions == (T, F, F, F, F, F, F, F)
    assert trace.steps[1].conditions == (T,) * 8
    # factor 1 may not reuse C_0 of factor 0 (D4 fails)
    assert trace.steps[3].conditions == (T, T, T, F, T, T, T, F)


def test_two_vertex_factors():
    trace = run(two_vertex_instance())
    f0, f1 = build_factors(trace)
    assert sorted(f0.edges) == [(0, 1)]
    assert f1.number_of_edges() == 0
    report = check_C(trace)
    assert report.ok
    assert report.coverage == 1.0
    doc = summary(trace)
    assert doc["steps"] == 4
    assert doc["actions"] == {"skip": 3, "assign": 1}
    assert doc["acyclic"] == [True, True]


def test_evaluate_at_reads_the_table():
    cfg = two_vertex_instance()
    table = SlotTable(2, 2)
    assert evaluate_at(cfg, table, 0, 0, 1, 0, 0) == (T, T, T, T, T, T, T)
    table.assign(0, 0, 0, 1)
    d = evaluate_at(cfg, table, 1, 0, 1, 0, 1)
    assert d[0] and not d[3]


# ── the adequate instance ──


def test_first_pass_fills_then_defers_to_b():
    trace = run(adequate_instance(1, 3, 5))
    table = trace.table
    assert table is not None
    placed = {(s.i, s.action) for s in trace.steps if s.tau == 0 and s.action is not StepAction.SKIP}
    assign = {i for i, a in placed if a is StepAction.ASSIGN}
    to_b = {i for i, a in placed if a is StepAction.PUT_IN_B}
    assert assign == {1, 2, 10, 11, 19, 20}
    assert to_b == {28, 29, 37, 38}
    assert table.a_set(0, 0)[:2] == [1, 2]
    assert table.b_set(0, 3)[:2] == [28, 29]


def test_pass_starts_increase():
    trace = run(adequate_instance(1, 3, 5))
    assert trace.pass_starts(0) == [0, 2, 3]
    assert sigma_progress(trace).ok


def test_coverage_grows_with_passes():
    cfg = adequate_instance(1, 3, 5)
    covered = [check_C(run(dataclasses.replace(cfg, passes=t))).covered_edges for t in (1, 2, 3)]
    assert covered == [10, 25, 45]
    assert check_C(run(cfg)).coverage == 1.0


def test_dot_export_colors_factors():
    dot = factors_to_dot(build_factors(run(two_vertex_instance())))
    assert dot.startswith("graph factors {")
    assert '  0 -- 1 [factor=0, color="red"];' in dot


def test_is_acyclic():
    assert is_acyclic(nx.Graph())
    assert is_acyclic(nx.path_graph(4))
    assert not is_acyclic(nx.cycle_graph(3))


# ── random instances ──


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    vertices=st.integers(min_value=1, max_value=14),
    factors=st.integers(min_value=1, max_value=3),
    passes=st.integers(min_value=1, max_value=3),
    extra=st.integers(min_value=0, max_value=12),
    explicit=st.booleans(),
)
def test_random_runs_keep_the_invariants(seed, vertices, factors, passes, extra, explicit):
    cfg = random_instance(random.Random(seed), vertices=vertices, factors=factors,
                          passes=passes, extra_edges=extra, explicit_partition=explicit)
    trace = run(cfg)
    assert trace.step_count() == factors * passes * vertices
    assert check_C(trace).ok
    assert all(is_acyclic(g) for g in build_factors(trace))
    keys = [s.key for s in trace.steps]
    assert keys == sorted(keys)


def test_pass_starts_increase_over_six_passes():
    trace = run(adequate_instance(1, 6))
    assert trace.pass_starts(0) == [0, 2, 3, 4, 5, 6]
    progress = sigma_progress(trace)
    assert progress.adequate
    assert progress.ok is True
    assert progress.verdict == "increasing"


def test_sparse_instances_get_no_sigma_verdict():
    cfg = dataclasses.replace(adequate_instance(1, 5, 6), passes=6)
    assert not is_adequate(cfg)
    progress = sigma_progress(run(cfg))
    assert progress.ok is None
    assert progress.to_dict()["verdict"] == "not adequate"
    assert summary(run(two_vertex_instance()))["sigma"]["adequate"] is False


def test_adequate_instances_carry_every_pass():
    assert is_adequate(adequate_instance(2, 3))
    assert is_adequate(adequate_instance(1, 6, 7))
    with pytest.raises(ValueError):
        adequate_instance(1, 6, 5)


def test_runs_are_deterministic():
    cfg = random_instance(random.Random(7), vertices=60, factors=3, passes=4, extra_edges=30)
    assert trace_text(run(cfg)) == trace_text(run(cfg))
