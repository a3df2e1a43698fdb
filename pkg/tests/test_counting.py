"""Tests for closed-form demand arithmetic."""

from __future__ import annotations

import pytest

from omegafactor.domain import OMEGA, count_lt
from omegafactor.engine.counting import DemandArithmetic
from omegafactor.forests.family import (
    BranchingProfile,
    RegularLayout,
    codes_of_below,
    count_codes_below,
)
from omegafactor.kernel.pairing import pair, unpair
from tests.conftest import family


def _brute_demands(layout, owner, at_root, n):
    """First n valid (m, k) in code order."""
    out = []
    code = 0
    while len(out) < n:
        m, k = unpair(code)
        p = layout.profile(m)
        c = p.top if at_root else (p.inner if m == owner else p.gap)
        if count_lt(k, c):
            out.append((m, k))
        code += 1
    return out


@pytest.mark.parametrize("name", ["k2-family", "lambda:2", "lambda:4", "omega-regular", "star-mix"])
def test_only_uniform_families_get_a_layout(name):
    fam = family(name)
    assert (fam.layout is None) == (name == "star-mix")


def test_regular_profiles():
    assert family("k2-family").layout.profile(9) == BranchingProfile(1, 1, 0)
    assert family("lambda:3").layout.profile(0) == BranchingProfile(3, 3, 2)
    assert family("omega-regular").layout.profile(2) == BranchingProfile(OMEGA, OMEGA, OMEGA)


@pytest.mark.parametrize("name", ["k2-family", "lambda:3", "omega-regular"])
@pytest.mark.parametrize("owner", [None, 0, 2, 5])
def test_demand_arithmetic_matches_code_order(name, owner):
    layout = family(name).layout
    arith = DemandArithmetic(layout)
    at_root = owner is None
    expected = _brute_demands(layout, owner, at_root, 40)
    for s, (m, k) in enumerate(expected):
        assert arith.demand_at(s, owner, at_root=at_root) == (m, k)
        assert arith.slot(m, k, owner, at_root=at_root) == s
    for m in range(6):
        for length in (0, 1, 7, 40):
            want = sum(1 for mm, _ in expected[:length] if mm == m)
            assert arith.count_in_prefix(m, length, owner, at_root=at_root) == want
        assert list(arith.slots(m, 40, owner, at_root=at_root)) == [
            s for s, (mm, _) in enumerate(expected) if mm == m
        ]


def test_generic_baseline_ignores_inner_branching():
    arith = DemandArithmetic(family("lambda:3").layout)
    assert arith.n_cont(4, None) == 3
    assert arith.n_cont(4, 4) == 2
    assert arith.n_cont(4, 4, at_root=True) == 3


def test_count_codes_below_matches_enumeration():
    finite = [3, 1, OMEGA]
    periodic = [2, 0, 5]

    def order(c):
        return finite[c] if c < len(finite) else periodic[(c - len(finite)) % len(periodic)]

    running = 0
    for n in range(300):
        assert count_codes_below(n, finite, periodic) == running
        c, p = unpair(n)
        if count_lt(p, order(c)):
            running += 1


def test_codes_of_below():
    for c in range(6):
        for n in range(60):
            assert codes_of_below(c, n) == sum(1 for p in range(n) if pair(c, p) < n)


def test_layout_rotation():
    a, b = BranchingProfile(2, 2, 1), BranchingProfile(1, 1, 0)
    layout = RegularLayout((a,), (b, a))
    assert [layout.profile(m) for m in range(5)] == [a, b, a, b, a]
