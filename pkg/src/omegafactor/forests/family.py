"""Runtime factor forests and the indexed family.

Component positions of one forest: the finite-multiplicity generators' copies
first (in generator order), then the omega-multiplicity generators round-robin
forever. Vertex t^m_i is the i-th valid (position c, local index p) pair in
ascending pair(c, p) order; `count_below` evaluates that rank in closed form by
summing arithmetic progressions over the periodic tail, and `locate` inverts it
by bisection.

Pools: position 0 is pool 0 (the component of t^m_0); position c >= 1 with
unpair(c - 1) = (a, b) is component b of pool a + 1, so every pool d >= 1 is
infinite.

Factor expansion: finite-repeat descriptions give factors 0.. in order, then the
omega-repeat descriptions take turns. Turn-taking serves the same purpose as
decoding a factor index through unpair: every omega-repeat description owns
infinitely many factor indices and the lookup is O(1). It also keeps the
per-factor branching periodic, which `RegularLayout` counts in closed form.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import cached_property
from threading import Lock

from omegafactor.domain import (
    OMEGA,
    ComponentRef,
    Count,
    FamilyValidationError,
    ForestVertex,
    PoolIndexError,
    UnknownFactorError,
)
from omegafactor.forests.shapes import Shape
from omegafactor.forests.spec import (
    FactorDescription,
    ForestFamilySpec,
    build_shape,
    validate,
)
from omegafactor.kernel.pairing import pair, triangle, unpair
from omegafactor.logging import get_logger

log = get_logger("forests")


def _ap_min_sum(first: int, step: int, lo: int, hi: int, k: int, order: Count) -> int:
    """Sum of min(order, k - c) over c = first (mod step), first <= c, lo <= c <= hi."""
    start = max(lo, first)
    c0 = start + (first - start) % step
    if hi < c0:
        return 0
    n = (hi - c0) // step + 1
    if order is OMEGA:
        n_full = 0
    else:
        theta = k - order
        n_full = 0 if theta < c0 else min(n, (theta - c0) // step + 1)
    rest = n - n_full
    full = 0 if order is OMEGA else n_full * order
    # sum over t in [n_full, n) of (k - c0 - step * t)
    t_sum = triangle(n - 1) - triangle(n_full - 1)
    return full + rest * (k - c0) - step * t_sum


def count_codes_below(n: int, finite: Sequence[Count], periodic: Sequence[Count]) -> int:
    """Number of codes pair(c, p) < n with p < order of position c.

    Position orders are `finite` first, then `periodic` repeated forever.
    """
    if n <= 0:
        return 0
    a, b = unpair(n)
    s = a + b
    f = len(finite)
    total = 0
    for c in range(min(f, s + 1)):
        bound = s - c + (1 if c > a else 0)
        o = finite[c]
        total += bound if o is OMEGA else min(o, bound)
    if s >= f:
        g = len(periodic)
        for j, o in enumerate(periodic):
            total += _ap_min_sum(f + j, g, f, a, s, o)
            total += _ap_min_sum(f + j, g, max(f, a + 1), s, s + 1, o)
    return total


def codes_of_below(c: int, n: int) -> int:
    """Number of p with pair(c, p) < n."""
    a, b = unpair(n)
    s = a + b
    if c > s:
        return 0
    return s - c + (1 if c > a else 0)


@dataclass(frozen=True, slots=True)
class BranchingProfile:
    """Children counts a factor's labels can have, by kind of label.

    top:   the label-0 vertex (root of the pool-0 component)
    gap:   every other component root, or None when they differ
    inner: every non-root vertex, or None when they differ
    """

    top: Count
    gap: Count | None
    inner: Count | None

    @property
    def regular(self) -> bool:
        return self.gap is not None and self.inner is not None


@dataclass(frozen=True)
class RegularLayout:
    """Branching of every factor of a family whose profiles are all regular.

    Factor m uses `prefix[m]` for m < len(prefix), then `rotation` in turn.
    """

    prefix: tuple[BranchingProfile, ...]
    rotation: tuple[BranchingProfile, ...]

    def profile(self, m: int) -> BranchingProfile:
        if m < len(self.prefix):
            return self.prefix[m]
        return self.rotation[(m - len(self.prefix)) % len(self.rotation)]

    @cached_property
    def _top_orders(self) -> tuple[list[Count], list[Count]]:
        return [p.top for p in self.prefix], [p.top for p in self.rotation]

    @cached_property
    def _gap_orders(self) -> tuple[list[Count], list[Count]]:
        gaps = [p.gap for p in self.prefix], [p.gap for p in self.rotation]
        return gaps  # type: ignore[return-value]

    def codes_below(self, n: int, *, at_root: bool) -> int:
        """Number of (m, k) with pair(m, k) < n and k below m's top or gap branching."""
        return count_codes_below(n, *(self._top_orders if at_root else self._gap_orders))


def pool_of_position(c: int) -> tuple[int, int]:
    if c == 0:
        return 0, 0
    a, b = unpair(c - 1)
    return a + 1, b


def position_of_pool(d: int, r: int) -> int:
    if d == 0:
        if r != 0:
            raise PoolIndexError(f"pool 0 holds a single component, rank {r} does not exist")
        return 0
    return 1 + pair(d - 1, r)


class Forest:
    """One factor forest: omega components of the given shapes, no isolated vertices."""

    __slots__ = ("finite", "periodic", "label", "_orders", "_origin", "_loc", "_splits", "_lock")

    def __init__(
        self,
        finite: list[tuple[Shape, int]],
        periodic: list[tuple[Shape, int]],
        *,
        label: str = "",
        origin: tuple[Forest, int] | None = None,
    ) -> None:
        if not periodic:
            raise ValueError("a forest needs at least one omega-multiplicity generator")
        self.finite = finite
        self.periodic = periodic
        self.label = label
        self._orders = ([s.order for s, _ in finite], [s.order for s, _ in periodic])
        self._origin = origin
        self._loc: dict[int, tuple[int, int]] = {}
        self._splits: dict[int, Forest] = {}
        self._lock = Lock()

    @classmethod
    def from_description(cls, desc: FactorDescription, label: str = "") -> Forest:
        finite: list[tuple[Shape, int]] = []
        periodic: list[tuple[Shape, int]] = []
        for gi, gen in enumerate(desc.components):
            shape = build_shape(gen)
            cnt = gen.count
            if cnt is OMEGA:
                periodic.append((shape, gi))
            else:
                finite.extend((shape, gi) for _ in range(cnt))
        return cls(finite, periodic, label=label)

    # ── components ──

    @property
    def order(self) -> Count:
        return OMEGA

    @property
    def n_finite(self) -> int:
        return len(self.finite)

    @property
    def period(self) -> int:
        return len(self.periodic)

    def _entry(self, c: int) -> tuple[Shape, int]:
        if c < 0:
            raise IndexError(f"negative component position {c}")
        if c < len(self.finite):
            return self.finite[c]
        return self.periodic[(c - len(self.finite)) % len(self.periodic)]

    def shape_at(self, c: int) -> Shape:
        return self._entry(c)[0]

    def generator_at(self, c: int) -> int:
        return self._entry(c)[1]

    # ── canonical enumeration ──

    def count_below(self, n: int) -> int:
        """Number of vertices whose pair(c, p) code is < n."""
        return count_codes_below(n, *self._orders)

    def branching(self) -> BranchingProfile:
        gaps = {s.n_children(0) for s, _ in self.finite[1:] + self.periodic}
        inner = {s.inner_branching for s, _ in self.finite + self.periodic}
        return BranchingProfile(
            top=self.shape_at(0).n_children(0),
            gap=gaps.pop() if len(gaps) == 1 else None,
            inner=inner.pop() if len(inner) == 1 else None,
        )

    def index(self, c: int, p: int) -> int:
        if not self.shape_at(c).contains(p):
            raise IndexError(f"component {c} ({self.shape_at(c).label}) has no vertex {p}")
        return self.count_below(pair(c, p))

    def locate(self, i: int) -> tuple[int, int]:
        """(component position, local index) of vertex i."""
        if i < 0:
            raise IndexError(f"negative vertex index {i}")
        hit = self._loc.get(i)
        if hit is not None:
            return hit
        lo, hi = 0, pair(i, 0)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.count_below(mid + 1) > i:
                hi = mid
            else:
                lo = mid + 1
        out = unpair(lo)
        with self._lock:
            self._loc[i] = out
        return out

    # ── vertex oracles (global indices) ──

    def degree(self, i: int) -> Count:
        c, p = self.locate(i)
        return self.shape_at(c).degree(p)

    def kth_neighbor(self, i: int, k: int) -> int:
        c, p = self.locate(i)
        return self.index(c, self.shape_at(c).neighbor(p, k))

    def parent_of(self, i: int) -> int | None:
        c, p = self.locate(i)
        q = self.shape_at(c).parent(p)
        return None if q is None else self.index(c, q)

    def is_local_root(self, i: int) -> bool:
        return self.locate(i)[1] == 0

    def n_continuations(self, i: int) -> Count:
        """Neighbors other than the local parent."""
        c, p = self.locate(i)
        return self.shape_at(c).n_children(p)

    def continuation(self, i: int, k: int) -> int:
        c, p = self.locate(i)
        return self.index(c, self.shape_at(c).child(p, k))

    def local_height(self, i: int) -> int:
        c, p = self.locate(i)
        return self.shape_at(c).height_of(p)

    def adjacent(self, i: int, j: int) -> bool:
        ci, pi = self.locate(i)
        cj, pj = self.locate(j)
        return ci == cj and self.shape_at(ci).adjacent(pi, pj)

    def component_position(self, i: int) -> int:
        return self.locate(i)[0]

    def root_index(self, c: int) -> int:
        return self.index(c, 0)

    # ── splitting into omega sub-forests ──

    def _sub_finite(self, c: int) -> int:
        return len(self.finite) if c == 0 else 0

    def split(self, c: int) -> Forest:
        """Sub-forest c of an omega-fold partition of the components.

        Sub-forest 0 keeps the finite prefix; every sub-forest takes the periodic
        blocks with block number pair(c, b), b = 0, 1, 2, ...
        """
        hit = self._splits.get(c)
        if hit is not None:
            return hit
        finite = self.finite if c == 0 else []
        sub = Forest(list(finite), list(self.periodic), label=f"{self.label}/{c}", origin=(self, c))
        with self._lock:
            return self._splits.setdefault(c, sub)

    def base_position(self, c: int, sub_c: int) -> int:
        f_sub = self._sub_finite(c)
        if sub_c < f_sub:
            return sub_c
        b, q = divmod(sub_c - f_sub, len(self.periodic))
        return len(self.finite) + len(self.periodic) * pair(c, b) + q

    def split_locate(self, i: int) -> tuple[int, int]:
        """(sub-forest c, index inside split(c)) of vertex i."""
        pos, p = self.locate(i)
        if pos < len(self.finite):
            return 0, self.split(0).index(pos, p)
        block, q = divmod(pos - len(self.finite), len(self.periodic))
        c, b = unpair(block)
        sub_c = self._sub_finite(c) + len(self.periodic) * b + q
        return c, self.split(c).index(sub_c, p)

    def lift(self, i: int) -> int:
        """Index of vertex i in the forest this one was split from (identity otherwise)."""
        if self._origin is None:
            return i
        base, c = self._origin
        sub_c, p = self.locate(i)
        return base.lift(base.index(base.base_position(c, sub_c), p))

    def __repr__(self) -> str:
        return f"<Forest {self.label} finite={len(self.finite)} period={len(self.periodic)}>"


class ForestFamily:
    """The indexed family {T^m : m < omega}, with the oracle surface the engine uses."""

    def __init__(
        self,
        factor_fn: Callable[[int], Forest],
        *,
        name: str,
        spec: ForestFamilySpec | None = None,
        template_fn: Callable[[int], int] | None = None,
        layout: RegularLayout | None = None,
    ) -> None:
        self.name = name
        self.spec = spec
        self.layout = layout
        self._factor_fn = factor_fn
        self._template_fn = template_fn
        self._factors: dict[int, Forest] = {}
        self._lock = Lock()

    @classmethod
    def from_spec(cls, spec: ForestFamilySpec) -> ForestFamily:
        report = validate(spec)
        if not report.ok:
            raise FamilyValidationError(report)
        templates = [
            Forest.from_description(desc, label=f"{spec.name or 'family'}#{ti}")
            for ti, desc in enumerate(spec.factors)
        ]
        prefix: list[int] = []
        rotation: list[int] = []
        for ti, desc in enumerate(spec.factors):
            rep = desc.repeat_count
            if rep is OMEGA:
                rotation.append(ti)
            else:
                prefix.extend([ti] * rep)

        def template_of(m: int) -> int:
            if m < len(prefix):
                return prefix[m]
            return rotation[(m - len(prefix)) % len(rotation)]

        profiles = [t.branching() for t in templates]
        layout = None
        if all(p.regular for p in profiles):
            layout = RegularLayout(
                tuple(profiles[ti] for ti in prefix), tuple(profiles[ti] for ti in rotation)
            )
        log.debug(
            "family_built", name=spec.name, templates=len(templates), prefix=len(prefix),
            regular=layout is not None,
        )
        return cls(
            lambda m: templates[template_of(m)],
            name=spec.name or "family",
            spec=spec,
            template_fn=template_of,
            layout=layout,
        )

    def factor(self, m: int) -> Forest:
        if m < 0:
            raise UnknownFactorError(m)
        hit = self._factors.get(m)
        if hit is not None:
            return hit
        forest = self._factor_fn(m)
        with self._lock:
            return self._factors.setdefault(m, forest)

    def template_of(self, m: int) -> int:
        if m < 0:
            raise UnknownFactorError(m)
        if self._template_fn is None:
            raise ValueError(f"family {self.name} has no description templates")
        return self._template_fn(m)

    # ── oracle surface ──

    def vertex_count(self, m: int) -> Count:
        return self.factor(m).order

    def degree(self, v: ForestVertex) -> Count:
        return self.factor(v.m).degree(v.i)

    def kth_neighbor(self, v: ForestVertex, k: int) -> ForestVertex:
        return ForestVertex(v.m, self.factor(v.m).kth_neighbor(v.i, k))

    def component_of(self, v: ForestVertex) -> ComponentRef:
        d, r = pool_of_position(self.factor(v.m).component_position(v.i))
        return ComponentRef(v.m, d, r)

    def root_of(self, c: ComponentRef) -> ForestVertex:
        return ForestVertex(c.m, self.factor(c.m).root_index(position_of_pool(c.d, c.r)))

    def pool_component(self, m: int, d: int, r: int) -> ComponentRef:
        self.factor(m)
        position_of_pool(d, r)
        return ComponentRef(m, d, r)

    def __repr__(self) -> str:
        return f"<ForestFamily {self.name}>"
