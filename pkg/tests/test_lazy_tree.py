"""Tests for tree addresses and lazy sphere/ball enumeration."""

from __future__ import annotations

import pytest

from omegafactor.domain import ROOT, AddressError, TreeAddress
from omegafactor.kernel.pairing import level_rank
from omegafactor.tree.lazy import ball, ball_size, format_address, in_window, parse_address, sphere


def test_address_text_round_trip():
    for text in ("/", "/0", "/3/1", "/10/0/7"):
        assert format_address(parse_address(text)) == text
    assert parse_address(" /2/5 ").slots == (2, 5)


@pytest.mark.parametrize("bad", ["", "3/1", "/a", "/1//2", "/-1"])
def test_bad_addresses(bad):
    with pytest.raises(AddressError):
        parse_address(bad)


def test_root_has_no_parent():
    with pytest.raises(AddressError):
        ROOT.parent()
    with pytest.raises(AddressError):
        _ = ROOT.last
    with pytest.raises(AddressError):
        ROOT.son(-1)


def test_address_navigation():
    w = TreeAddress((4, 0, 2))
    assert w.depth == 3
    assert w.last == 2
    assert w.parent() == TreeAddress((4, 0))
    assert w.prefix(1).son(0) == w.parent()


def test_sphere_is_ordered_by_level_rank():
    shell = list(sphere(2, 3))
    assert len(shell) == 9
    assert [level_rank(w) for w in shell] == sorted(level_rank(w) for w in shell)
    assert list(sphere(0, 5)) == [ROOT]


def test_ball_lists_parents_first():
    seen = set()
    for w in ball(3, 4):
        assert w.is_root or w.parent() in seen
        seen.add(w)
    assert len(seen) == 85 == ball_size(3, 4)
    assert ball_size(4, 1) == 5
    assert ball_size(2, 0) == 1


def test_in_window():
    assert in_window(TreeAddress((1, 2)), 2, 3)
    assert not in_window(TreeAddress((1, 3)), 2, 3)
    assert not in_window(TreeAddress((0, 0, 0)), 2, 3)


def test_sphere_rejects_negative_scope():
    with pytest.raises(ValueError):
        list(sphere(-1, 2))
