"""Lazy factorization of the omega-regular tree into a countable forest family.

Schedule:
  - the root carries t^m_0 for every m
  - son slot n of w serves the n-th valid (m, k) in ascending pair(m, k) order,
    where (m, k) is valid iff k < number of continuations of w's m-label; that
    son receives continuation k of the label (edge of factor m)
  - every other vertex at depth d is an m-gap; the r-th m-gap of level d (in
    level-rank order) receives the root of component r of pool d of T^m

Gap labels need the number of m-continuations below a level rank, and level
ranks grow doubly exponentially with depth. Two counting modes:

  closed form  the family has a regular layout (see `counting`): a demand list
               depends only on the factor owning the parent edge, so the count
               over a level is a sum over slot positions plus corrections for
               the few owners that perturb the list, one level up
  enumerated   any other family: owners of every rank below the query are
               materialized per level (SortedList per factor), bounded by the
               memo budget

Both modes skip factors that cannot own any slot below the rank (factor m
first appears at slot >= m - 1), which keeps large factor indices cheap.

Answers never depend on cache state, mode or query order. Caches are guarded by
one re-entrant lock; the memo budget bounds total cached entries.
"""

from __future__ import annotations

import heapq
import threading
from collections.abc import Iterator

from sortedcontainers import SortedList

from omegafactor.domain import (
    OMEGA,
    ROOT,
    Count,
    Demand,
    EdgeAssignment,
    MemoBudgetExceeded,
    TreeAddress,
    count_lt,
)
from omegafactor.engine.counting import DemandArithmetic
from omegafactor.forests.family import (
    BranchingProfile,
    ForestFamily,
    pool_of_position,
    position_of_pool,
)
from omegafactor.kernel.pairing import level_rank, level_unrank, pair, unpair
from omegafactor.logging import get_logger

log = get_logger("engine")


class _DemandCursor:
    """Demand list of one address, extended on demand."""

    __slots__ = ("demands", "slot_index", "heap")

    def __init__(self) -> None:
        self.demands: list[Demand] = []
        self.slot_index: dict[tuple[int, int], int] = {}
        # (pair(m, k), m, k) candidates; the next factor is pushed when (m, 0) pops
        self.heap: list[tuple[int, int, int]] = [(0, 0, 0)]


class _Level:
    __slots__ = ("owners", "conts")

    def __init__(self) -> None:
        self.owners: list[int] = []
        self.conts: dict[int, SortedList] = {}


def _owner_bound(d: int, rank: int) -> int:
    """No factor above this owns a depth-d vertex of level rank < rank."""
    if d == 1:
        # at the root every label has a continuation, so factor m starts at slot >= m
        return rank - 1
    a, s = unpair(rank)
    # ranks below pair(a, s) use slots <= a + s - 1, owned by factors <= slot + 1
    return a + s


class FactorizationEngine:
    """Query engine for one forest family over the omega-regular tree."""

    def __init__(
        self, family: ForestFamily, *, memo_budget: int = 5_000_000, closed_form: bool = True
    ) -> None:
        self.family = family
        self.memo_budget = memo_budget
        layout = family.layout if closed_form else None
        self._arith = None if layout is None else DemandArithmetic(layout)
        self._labels: dict[tuple[TreeAddress, int], int] = {}
        self._owners: dict[TreeAddress, int] = {}
        self._profiles: dict[int, BranchingProfile] = {}
        # closed form
        self._codes: dict[tuple[TreeAddress, int], int] = {}
        self._demands: dict[tuple[TreeAddress, int], Demand] = {}
        self._conts: dict[tuple[int, int, int], int] = {}
        # enumerated
        self._cursors: dict[TreeAddress, _DemandCursor] = {}
        self._levels: dict[int, _Level] = {}
        self._memo = 0
        self._lock = threading.RLock()

    @property
    def closed_form(self) -> bool:
        return self._arith is not None

    @property
    def memo_size(self) -> int:
        return self._memo

    def _charge(self, n: int = 1) -> None:
        self._memo += n
        if self._memo > self.memo_budget:
            log.warning("memo_budget_exceeded", size=self._memo, budget=self.memo_budget)
            raise MemoBudgetExceeded(self._memo, self.memo_budget)

    # ── labels ──

    def label_of(self, w: TreeAddress, m: int) -> int:
        """i such that t^m_i sits at w."""
        self.family.factor(m)
        with self._lock:
            return self._label(w, m)

    def _label(self, w: TreeAddress, m: int) -> int:
        if w.is_root:
            return 0
        key = (w, m)
        hit = self._labels.get(key)
        if hit is not None:
            return hit
        if self._parent_owner(w) == m:
            i = self._demand_at(w.parent(), w.last).target
        else:
            d = w.depth
            rank = level_rank(w)
            r = rank - self._conts_below(d, m, rank)
            i = self.family.factor(m).root_index(position_of_pool(d, r))
        self._labels[key] = i
        self._charge()
        return i

    def _parent_owner(self, w: TreeAddress) -> int:
        """Factor owning the edge from w's parent to w."""
        hit = self._owners.get(w)
        if hit is not None:
            return hit
        u, s = w.parent(), w.last
        owner = (
            unpair(self._code_at(u, s))[0] if self._arith is not None else self._demand_at(u, s).m
        )
        self._owners[w] = owner
        self._charge()
        return owner

    def _profile(self, m: int) -> BranchingProfile:
        hit = self._profiles.get(m)
        if hit is None:
            hit = self._profiles[m] = self.family.factor(m).branching()
        return hit

    # ── demand lists ──

    def _code_at(self, u: TreeAddress, s: int) -> int:
        assert self._arith is not None
        key = (u, s)
        hit = self._codes.get(key)
        if hit is not None:
            return hit
        if u.is_root:
            code = self._arith.code_at(s, None, at_root=True)
        else:
            code = self._arith.code_at(s, self._parent_owner(u))
        self._codes[key] = code
        self._charge()
        return code

    def _n_cont(self, w: TreeAddress, m: int) -> Count:
        """Continuations of w's m-label; gap roots are read off the profile when uniform."""
        if not w.is_root and self._parent_owner(w) != m:
            gap = self._profile(m).gap
            if gap is not None:
                return gap
        return self.family.factor(m).n_continuations(self._label(w, m))

    def _cursor(self, w: TreeAddress) -> _DemandCursor:
        cur = self._cursors.get(w)
        if cur is None:
            cur = self._cursors[w] = _DemandCursor()
            self._charge()
        return cur

    def _advance(self, w: TreeAddress, cur: _DemandCursor) -> None:
        """Append the next valid demand of w."""
        while True:
            _, m, k = heapq.heappop(cur.heap)
            if k == 0:
                heapq.heappush(cur.heap, (pair(m + 1, 0), m + 1, 0))
            n_cont = self._n_cont(w, m)
            if not count_lt(k, n_cont):
                continue
            target = self.family.factor(m).continuation(self._label(w, m), k)
            cur.slot_index[(m, k)] = len(cur.demands)
            cur.demands.append(Demand(m, k, target))
            if count_lt(k + 1, n_cont):
                heapq.heappush(cur.heap, (pair(m, k + 1), m, k + 1))
            self._charge()
            return

    def _demand_at(self, w: TreeAddress, s: int) -> Demand:
        if self._arith is not None:
            key = (w, s)
            dem = self._demands.get(key)
            if dem is None:
                m, k = unpair(self._code_at(w, s))
                target = self.family.factor(m).continuation(self._label(w, m), k)
                dem = self._demands[key] = Demand(m, k, target)
                self._charge()
            return dem
        cur = self._cursor(w)
        while len(cur.demands) <= s:
            self._advance(w, cur)
        return cur.demands[s]

    def demand_at(self, w: TreeAddress, s: int) -> Demand:
        """The demand served by son slot s of w."""
        if s < 0:
            raise ValueError(f"negative son slot {s}")
        with self._lock:
            return self._demand_at(w, s)

    def demands(self, w: TreeAddress) -> Iterator[Demand]:
        """The infinite demand list of w, son slot 0 first."""
        n = 0
        while True:
            yield self.demand_at(w, n)
            n += 1

    def _slot_of(self, w: TreeAddress, m: int, k: int) -> int:
        if self._arith is not None:
            owner = None if w.is_root else self._parent_owner(w)
            n_cont = self._arith.n_cont(m, owner, at_root=w.is_root)
            if k < 0 or not count_lt(k, n_cont):
                raise IndexError(
                    f"{w}: factor {m} has {n_cont} continuations there, no continuation {k}"
                )
            return self._arith.slot(m, k, owner, at_root=w.is_root)
        cur = self._cursor(w)
        hit = cur.slot_index.get((m, k))
        if hit is not None:
            return hit
        n_cont = self._n_cont(w, m)
        if k < 0 or not count_lt(k, n_cont):
            raise IndexError(f"{w}: factor {m} has {n_cont} continuations there, no continuation {k}")
        while (m, k) not in cur.slot_index:
            self._advance(w, cur)
        return cur.slot_index[(m, k)]

    def slot_of(self, w: TreeAddress, m: int, k: int) -> int:
        """Son slot of w serving continuation k of factor m."""
        self.family.factor(m)
        with self._lock:
            return self._slot_of(w, m, k)

    # ── continuation counts per level ──

    def _conts_below(self, d: int, m: int, rank: int) -> int:
        """m-continuations at depth d with level rank < rank."""
        if rank <= 0 or m > _owner_bound(d, rank):
            return 0
        if self._arith is None:
            lvl = self._extend_level(d, rank - 1)
            conts = lvl.conts.get(m)
            return 0 if conts is None else int(conts.bisect_left(rank))
        if d == 1:
            return self._arith.count_in_prefix(m, rank, None, at_root=True)
        key = (d, m, rank)
        hit = self._conts.get(key)
        if hit is None:
            hit = self._conts[key] = self._closed_conts(d, m, rank)
            self._charge()
        return hit

    def _closed_conts(self, d: int, m: int, rank: int) -> int:
        """Sum over parents a <= a + s of m-demands among their first L_a slots.

        With (a0, s0) = unpair(rank) and t = a0 + s0, parent a contributes its
        first L_a = t - a slots (one more when a > a0); the L_a run over 1..t
        plus s0 once. Parents whose owner perturbs factor m's slots are
        corrected by counting them one level up.
        """
        assert self._arith is not None
        a0, s0 = unpair(rank)
        t = a0 + s0
        base = list(self._arith.slots(m, t, None))
        total = sum(t - g + (1 if g < s0 else 0) for g in base)
        # an owner o only moves demands (m, k) with o <= m + k
        for o in range(m + len(base) + 1):
            p = self._profile(o)
            if p.gap == p.inner:
                continue
            for x in self._arith.slots(m, t, o):
                total += self._owned_above(d - 1, o, a0, t, x)
            for g in base:
                total -= self._owned_above(d - 1, o, a0, t, g)
        return total

    def _owned_above(self, e: int, o: int, a0: int, t: int, x: int) -> int:
        """o-owned depth-e ranks a <= t whose slot allowance L_a exceeds x."""
        total = 0
        head = min(a0 + 1, t - x)
        if head > 0:
            total += self._conts_below(e, o, head)
        if t - x > a0:
            total += self._conts_below(e, o, t - x + 1) - self._conts_below(e, o, a0 + 1)
        return total

    def _level(self, d: int) -> _Level:
        lvl = self._levels.get(d)
        if lvl is None:
            lvl = self._levels[d] = _Level()
        return lvl

    def _extend_level(self, d: int, upto: int) -> _Level:
        """Make owners known for every rank <= upto at depth d."""
        lvl = self._level(d)
        while len(lvl.owners) <= upto:
            rho = len(lvl.owners)
            if d == 1:
                u, s = ROOT, rho
            else:
                a, s = unpair(rho)
                u = level_unrank(d - 1, a)
            owner = self._demand_at(u, s).m
            lvl.owners.append(owner)
            conts = lvl.conts.get(owner)
            if conts is None:
                conts = lvl.conts[owner] = SortedList()
            conts.add(rho)
            self._charge()
        return lvl

    def _gap_address(self, d: int, m: int, r: int) -> TreeAddress:
        """The r-th depth-d address (level-rank order) that is not an m-continuation."""
        # least fixpoint of rho = r + #{m-continuations <= rho}
        rho = r
        while True:
            nxt = r + self._conts_below(d, m, rho + 1)
            if nxt == rho:
                return level_unrank(d, rho)
            rho = nxt

    # ── inverse and edges ──

    def vertex_of(self, m: int, i: int) -> TreeAddress:
        """The address carrying t^m_i."""
        forest = self.family.factor(m)
        c, p = forest.locate(i)
        shape = forest.shape_at(c)
        path: list[int] = []
        q = p
        while q != 0:
            path.append(shape.child_slot(q))
            parent = shape.parent(q)
            assert parent is not None
            q = parent
        path.reverse()
        d, r = pool_of_position(c)
        with self._lock:
            w = ROOT if d == 0 else self._gap_address(d, m, r)
            for k in path:
                w = w.son(self._slot_of(w, m, k))
        return w

    def factor_of_edge(self, w: TreeAddress, s: int) -> EdgeAssignment:
        """(m, i, j) of the edge between w and son slot s, with i < j."""
        with self._lock:
            dem = self._demand_at(w, s)
            i = self._label(w, dem.m)
        return EdgeAssignment.normalized(dem.m, i, dem.target)

    def factor_degree(self, w: TreeAddress, m: int) -> Count:
        """Degree of w in factor m: its label's continuations plus the parent edge if m owns it."""
        self.family.factor(m)
        with self._lock:
            n_cont = self._n_cont(w, m)
            up = 0 if w.is_root or self._parent_owner(w) != m else 1
        return OMEGA if n_cont is OMEGA else n_cont + up
