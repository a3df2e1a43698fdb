"""Closed-form demand arithmetic for families with a regular layout.

In a regular family the labels of a non-root tree vertex u are the continuation
label of one factor (the factor owning u's parent edge, `owner`) and gap roots
in every other factor. Their continuation counts are then fixed by the layout:
`inner` for the owner, `gap` for the rest, `top` for every factor at the tree
root. A demand list is fully known from the owner alone, so slots and
per-prefix counts are evaluated without computing any label.

`owner=None` outside the root describes a vertex whose parent edge belongs to
no factor: the plain gap layout, used as the baseline that real owners perturb.
"""

from __future__ import annotations

from collections.abc import Iterator

from omegafactor.domain import OMEGA, Count, count_lt
from omegafactor.forests.family import RegularLayout, codes_of_below
from omegafactor.kernel.pairing import pair, unpair


def _cap(c: Count, n: int) -> int:
    return n if c is OMEGA else min(c, n)


class DemandArithmetic:
    __slots__ = ("layout",)

    def __init__(self, layout: RegularLayout) -> None:
        self.layout = layout

    def n_cont(self, m: int, owner: int | None, *, at_root: bool = False) -> Count:
        """Continuations of factor m's label at a vertex of the given kind."""
        p = self.layout.profile(m)
        if at_root:
            return p.top
        if m == owner:
            assert p.inner is not None
            return p.inner
        assert p.gap is not None
        return p.gap

    def valid_below(self, n: int, owner: int | None, *, at_root: bool = False) -> int:
        """Valid demand codes below n, i.e. the slot the code n would take."""
        total = self.layout.codes_below(n, at_root=at_root)
        if at_root or owner is None:
            return total
        p = self.layout.profile(owner)
        assert p.gap is not None and p.inner is not None
        b = codes_of_below(owner, n)
        return total - _cap(p.gap, b) + _cap(p.inner, b)

    def slot(self, m: int, k: int, owner: int | None, *, at_root: bool = False) -> int:
        return self.valid_below(pair(m, k), owner, at_root=at_root)

    def code_at(self, s: int, owner: int | None, *, at_root: bool = False) -> int:
        """pair(m, k) of the demand served by slot s."""
        # every factor other than the owner has (m, 0) valid, so slot s lies below pair(s + 1, 0)
        lo, hi = 0, pair(s + 1, 0)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.valid_below(mid + 1, owner, at_root=at_root) > s:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def demand_at(self, s: int, owner: int | None, *, at_root: bool = False) -> tuple[int, int]:
        return unpair(self.code_at(s, owner, at_root=at_root))

    def slots(
        self, m: int, limit: int, owner: int | None, *, at_root: bool = False
    ) -> Iterator[int]:
        """Slots of factor m's demands below `limit`, ascending."""
        n = self.n_cont(m, owner, at_root=at_root)
        k = 0
        while count_lt(k, n):
            s = self.slot(m, k, owner, at_root=at_root)
            if s >= limit:
                return
            yield s
            k += 1

    def count_in_prefix(
        self, m: int, length: int, owner: int | None, *, at_root: bool = False
    ) -> int:
        """Factor-m demands among the first `length` slots."""
        if length <= 0:
            return 0
        # k-th demand of m sits at slot >= k
        lo, hi = 0, _cap(self.n_cont(m, owner, at_root=at_root), length)
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.slot(m, mid - 1, owner, at_root=at_root) < length:
                lo = mid
            else:
                hi = mid - 1
        return lo
