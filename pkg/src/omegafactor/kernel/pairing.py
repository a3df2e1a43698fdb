"""Canonical bijections and orders every other module is built on.

  pair / unpair          Cantor pairing N x N <-> N
  LexTriple / lex_cmp    lexicographic order on (m, tau, i) steps
  level_rank / unrank    depth-d addresses <-> N (depth 1 = raw slot, fold left with pair)
  x_partition_decode     son slot -> (m, t, r): class X^m(t), intra-class rank r

Python ints are arbitrary precision, so folds never wrap; negative inputs are
rejected instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import isqrt

from omegafactor.domain import AddressError, TreeAddress


def _natural(name: str, v: int) -> None:
    if v < 0:
        raise ValueError(f"{name} must be a natural number, got {v}")


def triangle(w: int) -> int:
    return w * (w + 1) // 2


def pair(a: int, b: int) -> int:
    _natural("a", a)
    _natural("b", b)
    return triangle(a + b) + b


def unpair(n: int) -> tuple[int, int]:
    _natural("n", n)
    w = (isqrt(8 * n + 1) - 1) // 2
    b = n - triangle(w)
    return w - b, b


# ── Lexicographic steps ────────────────────────────────────────────────────


class Ordering(str, Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"


@dataclass(frozen=True, slots=True, order=True)
class LexTriple:
    """A scheduler step (m, tau, i). Field order gives the lexicographic order."""

    m: int
    tau: int
    i: int

    def as_list(self) -> list[int]:
        return [self.m, self.tau, self.i]


def lex_cmp(t1: LexTriple, t2: LexTriple) -> Ordering:
    if t1 < t2:
        return Ordering.LESS
    if t1 > t2:
        return Ordering.GREATER
    return Ordering.EQUAL


# ── Level ranking ──────────────────────────────────────────────────────────


def level_rank(w: TreeAddress) -> int:
    if w.is_root:
        return 0
    rank = w.slots[0]
    for s in w.slots[1:]:
        rank = pair(rank, s)
    return rank


def level_unrank(d: int, n: int) -> TreeAddress:
    _natural("n", n)
    if d == 0:
        if n != 0:
            raise AddressError(f"depth 0 holds only the root, rank {n} does not exist")
        return TreeAddress()
    out: list[int] = []
    for _ in range(d - 1):
        n, s = unpair(n)
        out.append(s)
    out.append(n)
    return TreeAddress(tuple(reversed(out)))


# ── Son partition ──────────────────────────────────────────────────────────


def x_partition_decode(s: int) -> tuple[int, int, int]:
    m, rest = unpair(s)
    t, r = unpair(rest)
    return m, t, r


def x_partition_encode(m: int, t: int, r: int) -> int:
    return pair(m, pair(t, r))
