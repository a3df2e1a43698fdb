"""Tests for the pairing kernel: Cantor pairing, level ranks, son partition."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from omegafactor.domain import AddressError, TreeAddress
from omegafactor.kernel.pairing import (
    LexTriple,
    Ordering,
    lex_cmp,
    level_rank,
    level_unrank,
    pair,
    unpair,
    x_partition_decode,
    x_partition_encode,
)

nat = st.integers(min_value=0, max_value=10**6)


def test_pair_small_values():
    assert pair(0, 0) == 0
    assert pair(1, 0) == 1
    assert pair(0, 1) == 2
    assert pair(1, 1) == 4
    assert pair(0, 2) == 5
    assert unpair(1) == (1, 0)
    assert unpair(5) == (0, 2)


def test_pair_enumerates_diagonals_without_gaps():
    codes = sorted(pair(a, b) for a in range(20) for b in range(20) if a + b < 20)
    assert codes == list(range(len(codes)))


@given(nat, nat)
def test_unpair_inverts_pair(a, b):
    assert unpair(pair(a, b)) == (a, b)


@given(st.integers(min_value=0, max_value=10**12))
def test_pair_inverts_unpair(n):
    assert pair(*unpair(n)) == n


def test_pairing_rejects_negatives():
    with pytest.raises(ValueError):
        pair(-1, 0)
    with pytest.raises(ValueError):
        unpair(-3)


def test_huge_values_do_not_wrap():
    a = 2**80
    assert unpair(pair(a, a + 7)) == (a, a + 7)


def test_lex_order_on_steps():
    assert lex_cmp(LexTriple(0, 5, 9), LexTriple(1, 0, 0)) is Ordering.LESS
    assert lex_cmp(LexTriple(1, 1, 0), LexTriple(1, 0, 9)) is Ordering.GREATER
    assert lex_cmp(LexTriple(2, 2, 2), LexTriple(2, 2, 2)) is Ordering.EQUAL
    assert LexTriple(0, 1, 2).as_list() == [0, 1, 2]


def test_level_rank_depth_one_is_the_slot():
    for s in range(10):
        assert level_rank(TreeAddress((s,))) == s
    assert level_rank(TreeAddress()) == 0


@given(st.integers(min_value=1, max_value=5), st.integers(min_value=0, max_value=10**5))
def test_level_unrank_inverts_rank(d, n):
    w = level_unrank(d, n)
    assert w.depth == d
    assert level_rank(w) == n


def test_level_rank_is_a_bijection_on_a_window():
    from itertools import product

    ranks = {level_rank(TreeAddress(slots)) for slots in product(range(6), repeat=2)}
    assert len(ranks) == 36


def test_level_unrank_root():
    assert level_unrank(0, 0).is_root
    with pytest.raises(AddressError):
        level_unrank(0, 1)


@given(nat, nat, nat)
def test_x_partition_round_trip(m, t, r):
    assert x_partition_decode(x_partition_encode(m, t, r)) == (m, t, r)


def test_x_partition_first_classes():
    assert x_partition_decode(0) == (0, 0, 0)
    assert x_partition_decode(1) == (1, 0, 0)
    assert x_partition_decode(2) == (0, 1, 0)
    assert x_partition_decode(x_partition_encode(0, 0, 1)) == (0, 0, 1)


def test_level_rank_examples():
    assert level_rank(TreeAddress((7,))) == 7
    assert level_rank(TreeAddress((1, 1))) == 4
    assert level_unrank(2, 5) == TreeAddress((0, 2))


def test_x_partition_classes_are_infinite_and_covered():
    assert x_partition_decode(pair(2, pair(3, 1))) == (2, 3, 1)
    assert sum(1 for s in range(64) if x_partition_decode(s)[:2] == (0, 0)) >= 3
    decoded = [x_partition_decode(s) for s in range(10**4)]
    assert len(set(decoded)) == len(decoded)
    hit = {(m, t) for m, t, _ in decoded}
    assert all((m, t) in hit for m in range(4) for t in range(4))


@given(st.tuples(nat, nat, nat), st.tuples(nat, nat, nat), st.tuples(nat, nat, nat))
def test_lex_cmp_is_a_total_order(a, b, c):
    x, y, z = LexTriple(*a), LexTriple(*b), LexTriple(*c)
    flip = {Ordering.LESS: Ordering.GREATER, Ordering.GREATER: Ordering.LESS,
            Ordering.EQUAL: Ordering.EQUAL}
    assert lex_cmp(y, x) is flip[lex_cmp(x, y)]
    if lex_cmp(x, y) is Ordering.LESS and lex_cmp(y, z) is Ordering.LESS:
        assert lex_cmp(x, z) is Ordering.LESS
