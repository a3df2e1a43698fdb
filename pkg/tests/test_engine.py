"""Tests for the lazy factorization engine."""

from __future__ import annotations

import random

import pytest

from omegafactor.domain import OMEGA, ROOT, Demand, EdgeAssignment, MemoBudgetExceeded
from omegafactor.engine.factorization import FactorizationEngine
from omegafactor.tree.lazy import ball
from tests.conftest import addr, engine, family


def test_k2_root_serves_one_factor_per_slot(k2):
    for s in range(6):
        assert k2.demand_at(ROOT, s) == Demand(s, 0, 2)
        assert k2.factor_of_edge(ROOT, s) == EdgeAssignment(s, 0, 2)
        assert k2.label_of(addr(f"/{s}"), s) == 2


def test_k2_gap_labels(k2):
    assert k2.label_of(ROOT, 5) == 0
    assert k2.label_of(addr("/0"), 1) == 1
    assert k2.label_of(addr("/1"), 0) == 1
    assert k2.label_of(addr("/2"), 0) == 5
    assert k2.label_of(addr("/0"), 2) == 1
    assert k2.label_of(addr("/1"), 2) == 5
    assert k2.label_of(addr("/2"), 1) == 5


def test_k2_inverse(k2):
    assert k2.vertex_of(0, 0) == ROOT
    assert k2.vertex_of(3, 0) == ROOT
    assert k2.vertex_of(0, 1) == addr("/1")
    assert k2.vertex_of(1, 1) == addr("/0")
    assert k2.vertex_of(4, 2) == addr("/4")


def test_every_k2_vertex_has_degree_one_in_every_factor(k2):
    for w in ball(2, 3):
        for m in range(4):
            assert k2.factor_degree(w, m) == 1


def test_lambda3_root_slot_order(lambda3):
    expected = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0),
                (2, 1), (1, 2), (4, 0), (3, 1), (2, 2), (5, 0)]
    got = [(d.m, d.k) for d in (lambda3.demand_at(ROOT, s) for s in range(13))]
    assert got == expected
    assert [lambda3.demand_at(ROOT, lambda3.slot_of(ROOT, 0, k)).target for k in range(3)] == [2, 5, 9]
    for s, (m, k) in enumerate(expected):
        assert lambda3.slot_of(ROOT, m, k) == s


def test_lambda3_is_three_regular_in_every_factor(lambda3):
    for w in ball(2, 4):
        for m in range(3):
            assert lambda3.factor_degree(w, m) == 3


def test_omega_regular_degree_is_omega():
    eng = engine("omega-regular")
    assert eng.factor_degree(ROOT, 0) is OMEGA
    assert eng.factor_degree(addr("/3/1"), 2) is OMEGA


@pytest.mark.parametrize("name", ["k2-family", "lambda:2", "star-mix", "mixed-trees", "omega-regular"])
def test_label_and_vertex_of_are_inverse(name):
    eng = engine(name)
    for w in ball(2, 3):
        for m in range(3):
            assert eng.vertex_of(m, eng.label_of(w, m)) == w
    for m in range(3):
        for i in range(25):
            assert eng.label_of(eng.vertex_of(m, i), m) == i


@pytest.mark.parametrize("name", ["k2-family", "lambda:3", "star-mix", "mixed-trees"])
def test_edges_join_adjacent_labels(name):
    eng = engine(name)
    for w in ball(2, 4):
        if w.is_root:
            continue
        a = eng.factor_of_edge(w.parent(), w.last)
        forest = eng.family.factor(a.m)
        assert forest.adjacent(a.i, a.j)
        assert {a.i, a.j} == {eng.label_of(w.parent(), a.m), eng.label_of(w, a.m)}


def test_answers_do_not_depend_on_query_order():
    first = engine("star-mix")
    second = engine("star-mix")
    window = list(ball(2, 3))
    forward = [(first.label_of(w, m), first.factor_of_edge(w, 2)) for w in window for m in range(3)]
    backward = [
        (second.label_of(w, m), second.factor_of_edge(w, 2))
        for w in reversed(window) for m in reversed(range(3))
    ]
    assert forward == list(reversed(backward))


def test_demand_iterator_matches_random_access(star_mix):
    w = addr("/1/0")
    it = star_mix.demands(w)
    assert [next(it) for _ in range(8)] == [star_mix.demand_at(w, s) for s in range(8)]


def test_slot_of_rejects_missing_continuations(k2):
    with pytest.raises(IndexError):
        k2.slot_of(ROOT, 0, 1)
    with pytest.raises(ValueError):
        k2.demand_at(ROOT, -1)


def test_memo_budget_is_enforced():
    eng = FactorizationEngine(family("lambda:3"), memo_budget=20)
    with pytest.raises(MemoBudgetExceeded):
        for w in ball(3, 4):
            eng.label_of(w, 1)
    assert eng.memo_size > 20


@pytest.mark.parametrize("name", ["k2-family", "lambda:2", "lambda:3", "omega-regular"])
def test_closed_form_matches_enumeration(name):
    fast = FactorizationEngine(family(name))
    slow = FactorizationEngine(family(name), closed_form=False)
    assert fast.closed_form and not slow.closed_form
    for w in ball(3, 3):
        for m in range(4):
            assert fast.label_of(w, m) == slow.label_of(w, m)
    for w in ball(2, 3):
        for s in range(12):
            assert fast.demand_at(w, s) == slow.demand_at(w, s)
    for m in range(3):
        for i in range(30):
            assert fast.vertex_of(m, i) == slow.vertex_of(m, i)


def test_irregular_families_enumerate(star_mix, mixed_trees):
    assert not star_mix.closed_form
    assert not mixed_trees.closed_form
    w = addr("/3/2/1")
    assert star_mix.vertex_of(7, star_mix.label_of(w, 7)) == w


@pytest.mark.parametrize("text", ["/5/5/5/5", "/1/1/1/1/1/1", "/0/3/0/3/0/3"])
def test_deep_k2_labels(k2, text):
    w = addr(text)
    for m in range(3):
        i = k2.label_of(w, m)
        assert k2.vertex_of(m, i) == w
    a = k2.factor_of_edge(w.parent(), w.last)
    assert k2.family.factor(a.m).adjacent(a.i, a.j)


@pytest.mark.parametrize("m", [1, 5])
def test_lambda3_far_vertices(lambda3, m):
    w = lambda3.vertex_of(m, 5000)
    assert lambda3.label_of(w, m) == 5000
    assert lambda3.factor_degree(w, m) == 3


def test_k2_radius_six_window():
    from omegafactor.engine.window import materialize_ball

    window = materialize_ball(engine("k2-family"), 6, 2, 2, max_depth=6)
    assert len(window.vertices) == 127
    eng = engine("k2-family")
    for v in window.vertices:
        assert v.labels == tuple(eng.label_of(v.address, m) for m in range(2))


def test_large_factor_index_at_shallow_vertex(lambda3):
    # factors beyond the first slots own nothing near the root
    w = addr("/2/1")
    assert lambda3.vertex_of(500, lambda3.label_of(w, 500)) == w
    assert lambda3.factor_degree(w, 500) == 3


@pytest.mark.parametrize("name", ["k2-family", "lambda:3", "star-mix"])
def test_sampled_addresses_invert(name):
    eng = engine(name)
    sample = random.Random(name).sample(list(ball(4, 4)), 100)
    for w in sample:
        for m in range(4):
            i = eng.label_of(w, m)
            assert eng.vertex_of(m, i) == w
        if not w.is_root:
            a = eng.factor_of_edge(w.parent(), w.last)
            assert eng.family.factor(a.m).adjacent(a.i, a.j)


@pytest.mark.parametrize("name", ["k2-family", "lambda:3", "mixed-trees"])
def test_fresh_engines_agree(name):
    window = list(ball(3, 3))
    first = engine(name)
    second = engine(name)
    forward = [first.label_of(w, m) for w in window for m in range(4)]
    backward = [second.label_of(w, m) for w in reversed(window) for m in reversed(range(4))]
    assert forward == list(reversed(backward))
