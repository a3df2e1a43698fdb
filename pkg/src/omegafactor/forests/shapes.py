"""Component shapes: one rooted tree each, with a local vertex numbering.

Local index 0 is the component's designated root. Every shape numbers its
vertices so that a vertex's parent has a smaller index than the vertex and its
children are numbered in ascending order; neighbor lists are therefore
"parent first (if any), then children ascending", which is ascending index
order. The forest layer turns local indices into global ones monotonically, so
ascending local order is ascending canonical order too.

  LevelTree     level-by-level numbering; covers K2, paths, rays, stars
                (finite or omega leaves), finite-degree regular trees and
                complete binary trees
  OmegaTree     the omega-regular tree; index 1 + pair(depth-1, level rank)
  EdgeListTree  an explicit finite tree, BFS-numbered from label 0
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections import deque

from omegafactor.domain import OMEGA, Count, NeighborOutOfRange, Omega, TreeAddress, count_lt
from omegafactor.kernel.pairing import level_rank, level_unrank, pair, unpair


class Shape(ABC):
    """A rooted tree with at least two vertices and a canonical local numbering."""

    @property
    @abstractmethod
    def order(self) -> Count: ...

    @property
    @abstractmethod
    def label(self) -> str: ...

    @abstractmethod
    def degree(self, p: int) -> Count: ...

    @abstractmethod
    def parent(self, p: int) -> int | None: ...

    @abstractmethod
    def child(self, p: int, x: int) -> int:
        """The x-th child of p (0-based, ascending)."""

    @abstractmethod
    def child_slot(self, p: int) -> int:
        """Position of p among its parent's children. p must not be the root."""

    @abstractmethod
    def height_of(self, p: int) -> int:
        """Distance from the local root."""

    @property
    def inner_branching(self) -> Count | None:
        """Children of every non-root vertex, or None when they differ."""
        return None

    # ── derived ──

    def contains(self, p: int) -> bool:
        return p >= 0 and count_lt(p, self.order)

    def offset(self, p: int) -> int:
        return 0 if p == 0 else 1

    def n_children(self, p: int) -> Count:
        d = self.degree(p)
        return OMEGA if d is OMEGA else d - self.offset(p)

    def neighbor(self, p: int, k: int) -> int:
        if k < 0 or not count_lt(k, self.degree(p)):
            raise NeighborOutOfRange(f"{self.label}: vertex {p} has degree {self.degree(p)}, no neighbor {k}")
        if p != 0:
            if k == 0:
                parent = self.parent(p)
                assert parent is not None
                return parent
            return self.child(p, k - 1)
        return self.child(p, k)

    def position_of(self, p: int, q: int) -> int:
        """Index of q in p's neighbor list; q must be adjacent to p."""
        if p != 0 and q == self.parent(p):
            return 0
        if self.parent(q) != p:
            raise ValueError(f"{self.label}: {q} is not adjacent to {p}")
        return self.offset(p) + self.child_slot(q)

    def adjacent(self, p: int, q: int) -> bool:
        if not (self.contains(p) and self.contains(q)) or p == q:
            return False
        return self.parent(p) == q or self.parent(q) == p

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.label}>"


# ── Level-numbered trees ───────────────────────────────────────────────────


class LevelTree(Shape):
    """Root with `root_branching` children, every other internal vertex with
    `branching` children, levels 0..height (height None = unbounded).

    Level h starts at index 1 + r(1 + c + ... + c^(h-2)); vertex q of level h
    has children q*c .. q*c + c - 1 on level h + 1.
    """

    __slots__ = ("r", "c", "height", "_label")

    def __init__(self, root_branching: Count, branching: int, height: int | None, label: str) -> None:
        if root_branching is not OMEGA and root_branching < 1:
            raise ValueError("the root needs at least one child")
        if branching == 0:
            height = 1
        if height is None and branching < 1:
            raise ValueError("an unbounded level tree needs branching >= 1")
        if height is not None and height < 1:
            raise ValueError("height must be >= 1")
        if root_branching is OMEGA and height != 1:
            raise ValueError("omega root branching is only supported for stars")
        self.r = root_branching
        self.c = branching
        self.height = height
        self._label = label

    @property
    def label(self) -> str:
        return self._label

    @property
    def order(self) -> Count:
        if self.height is None or self.r is OMEGA:
            return OMEGA
        return self._level_start(self.height + 1)

    def _level_start(self, h: int) -> int:
        if h <= 1:
            return h
        assert not isinstance(self.r, Omega)
        if self.c == 1:
            return 1 + self.r * (h - 1)
        return 1 + self.r * (self.c ** (h - 1) - 1) // (self.c - 1)

    def locate(self, p: int) -> tuple[int, int]:
        """(level, offset within level) of local index p."""
        if not self.contains(p):
            raise NeighborOutOfRange(f"{self.label}: no vertex {p}")
        if p == 0:
            return 0, 0
        if self.r is OMEGA or p <= self.r:
            return 1, p - 1
        if self.c == 1:
            return 1 + (p - 1) // self.r, (p - 1) % self.r
        h = 1
        while self._level_start(h + 1) <= p:
            h += 1
        return h, p - self._level_start(h)

    @property
    def inner_branching(self) -> Count | None:
        if self.height == 1:
            return 0
        return self.c if self.height is None else None

    def _index(self, h: int, q: int) -> int:
        return self._level_start(h) + q

    def _internal(self, h: int) -> bool:
        return self.height is None or h < self.height

    def degree(self, p: int) -> Count:
        h, _ = self.locate(p)
        if h == 0:
            return self.r
        return 1 + self.c if self._internal(h) else 1

    def parent(self, p: int) -> int | None:
        h, q = self.locate(p)
        if h == 0:
            return None
        if h == 1:
            return 0
        return self._index(h - 1, q // self.c)

    def child(self, p: int, x: int) -> int:
        h, q = self.locate(p)
        if h == 0:
            if not count_lt(x, self.r):
                raise NeighborOutOfRange(f"{self.label}: root has {self.r} children, no child {x}")
            return 1 + x
        if not self._internal(h) or x >= self.c:
            raise NeighborOutOfRange(f"{self.label}: vertex {p} has no child {x}")
        return self._index(h + 1, q * self.c + x)

    def child_slot(self, p: int) -> int:
        h, q = self.locate(p)
        if h == 0:
            raise ValueError("the local root has no parent")
        return q if h == 1 else q % self.c

    def height_of(self, p: int) -> int:
        return self.locate(p)[0]


class OmegaTree(Shape):
    """The omega-regular tree. Local addresses are son-slot paths like tree addresses."""

    __slots__ = ()

    @property
    def label(self) -> str:
        return "regular-tree(omega)"

    @property
    def order(self) -> Count:
        return OMEGA

    @property
    def inner_branching(self) -> Count | None:
        return OMEGA

    def address(self, p: int) -> tuple[int, ...]:
        if p == 0:
            return ()
        h1, rank = unpair(p - 1)
        return level_unrank(h1 + 1, rank).slots

    def index(self, slots: tuple[int, ...]) -> int:
        if not slots:
            return 0
        return 1 + pair(len(slots) - 1, level_rank(TreeAddress(slots)))

    def degree(self, p: int) -> Count:
        if p < 0:
            raise NeighborOutOfRange(f"no vertex {p}")
        return OMEGA

    def parent(self, p: int) -> int | None:
        if p == 0:
            return None
        return self.index(self.address(p)[:-1])

    def child(self, p: int, x: int) -> int:
        if x < 0:
            raise NeighborOutOfRange(f"no child {x}")
        return self.index((*self.address(p), x))

    def child_slot(self, p: int) -> int:
        if p == 0:
            raise ValueError("the local root has no parent")
        return self.address(p)[-1]

    def height_of(self, p: int) -> int:
        return len(self.address(p))


class EdgeListTree(Shape):
    """A finite tree given by edges over labels 0..n-1, rooted at label 0."""

    __slots__ = ("_parents", "_children", "_heights", "_slots", "_label")

    def __init__(self, edges: list[tuple[int, int]], label: str = "finite-edge-list") -> None:
        n = len(edges) + 1
        adj: dict[int, list[int]] = {v: [] for v in range(n)}
        for u, v in edges:
            if u not in adj or v not in adj or u == v:
                raise ValueError(f"edge ({u}, {v}) is outside labels 0..{n - 1} or a loop")
            adj[u].append(v)
            adj[v].append(u)
        # BFS from label 0, visiting neighbors in ascending label order
        order: dict[int, int] = {0: 0}
        parents: list[int | None] = [None]
        heights = [0]
        children: list[list[int]] = [[]]
        slots = [0]
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in sorted(adj[u]):
                if v in order:
                    continue
                idx = len(order)
                order[v] = idx
                parents.append(order[u])
                heights.append(heights[order[u]] + 1)
                slots.append(len(children[order[u]]))
                children[order[u]].append(idx)
                children.append([])
                queue.append(v)
        if len(order) != n:
            raise ValueError("edge list is not a connected tree")
        self._parents = parents
        self._children = children
        self._heights = heights
        self._slots = slots
        self._label = label

    @property
    def label(self) -> str:
        return self._label

    @property
    def order(self) -> Count:
        return len(self._parents)

    @property
    def inner_branching(self) -> Count | None:
        counts = {len(kids) for kids in self._children[1:]}
        return counts.pop() if len(counts) == 1 else None

    def _check(self, p: int) -> None:
        if not 0 <= p < len(self._parents):
            raise NeighborOutOfRange(f"{self.label}: no vertex {p}")

    def degree(self, p: int) -> Count:
        self._check(p)
        return len(self._children[p]) + self.offset(p)

    def parent(self, p: int) -> int | None:
        self._check(p)
        return self._parents[p]

    def child(self, p: int, x: int) -> int:
        self._check(p)
        kids = self._children[p]
        if not 0 <= x < len(kids):
            raise NeighborOutOfRange(f"{self.label}: vertex {p} has no child {x}")
        return kids[x]

    def child_slot(self, p: int) -> int:
        self._check(p)
        if p == 0:
            raise ValueError("the local root has no parent")
        return self._slots[p]

    def height_of(self, p: int) -> int:
        self._check(p)
        return self._heights[p]
