"""Two-stage composition for arbitrary forest families.

Stage 1 factorizes the host tree with the omega-regular family, so every
component of every stage-1 factor Y^m is itself an omega-regular tree.
Final factor n is batch member q of batch m, (m, q) = unpair(n). Component c of
Y^m hosts its own stage-2 engine over the family q -> T^{pair(m, q)}.split(c),
run on canonical addresses given by `component_iso`; the split sub-forests of
one forest partition its components, so the union over c of stage-2 factor q is
a copy of T^n.
"""

from __future__ import annotations

import threading

from omegafactor.domain import OMEGA, EdgeAssignment, TreeAddress
from omegafactor.engine.factorization import FactorizationEngine
from omegafactor.forests.family import ForestFamily
from omegafactor.forests.spec import ForestFamilySpec, regular_family
from omegafactor.kernel.pairing import pair, unpair
from omegafactor.logging import get_logger

log = get_logger("pipeline")


class TwoStageFactorization:
    def __init__(self, family: ForestFamily, *, memo_budget: int = 5_000_000) -> None:
        self.family = family
        self.memo_budget = memo_budget
        self.stage1 = FactorizationEngine(
            ForestFamily.from_spec(regular_family(OMEGA)), memo_budget=memo_budget
        )
        self._stage2: dict[tuple[int, int], FactorizationEngine] = {}
        self._lock = threading.Lock()

    # ── stage plumbing ──

    def component_index(self, w: TreeAddress, m: int) -> int:
        """Position of w's stage-1 component in Y^m."""
        i = self.stage1.label_of(w, m)
        return self.stage1.family.factor(m).component_position(i)

    def stage2(self, m: int, c: int) -> FactorizationEngine:
        key = (m, c)
        eng = self._stage2.get(key)
        if eng is not None:
            return eng
        sub = ForestFamily(
            lambda q: self.family.factor(pair(m, q)).split(c),
            name=f"{self.family.name}[U{m}/c{c}]",
        )
        eng = FactorizationEngine(sub, memo_budget=self.memo_budget)
        with self._lock:
            eng = self._stage2.setdefault(key, eng)
        log.debug("stage2_engine", m=m, c=c)
        return eng

    def component_iso(self, m: int, w: TreeAddress) -> TreeAddress:
        """Canonical address of w inside its Y^m component (component root -> "/")."""
        forest = self.stage1.family.factor(m)
        out: list[int] = []
        while not forest.is_local_root(self.stage1.label_of(w, m)):
            dem = self.stage1.demand_at(w.parent(), w.last)
            assert dem.m == m
            out.append(dem.k)
            w = w.parent()
        return TreeAddress(tuple(reversed(out)))

    def component_root(self, m: int, c: int) -> TreeAddress:
        forest = self.stage1.family.factor(m)
        return self.stage1.vertex_of(m, forest.root_index(c))

    def component_address(self, m: int, c: int, canonical: TreeAddress) -> TreeAddress:
        """Inverse of component_iso for component c of Y^m."""
        w = self.component_root(m, c)
        for k in canonical.slots:
            w = w.son(self.stage1.slot_of(w, m, k))
        return w

    # ── composed queries ──

    def label_of(self, w: TreeAddress, n: int) -> int:
        m, q = unpair(n)
        c = self.component_index(w, m)
        sub_i = self.stage2(m, c).label_of(self.component_iso(m, w), q)
        return self.stage2(m, c).family.factor(q).lift(sub_i)

    def factor_of_edge(self, w: TreeAddress, s: int) -> EdgeAssignment:
        dem = self.stage1.demand_at(w, s)
        m = dem.m
        c = self.component_index(w, m)
        eng = self.stage2(m, c)
        a = eng.factor_of_edge(self.component_iso(m, w), dem.k)
        sub = eng.family.factor(a.m)
        return EdgeAssignment.normalized(pair(m, a.m), sub.lift(a.i), sub.lift(a.j))

    def vertex_of(self, n: int, i: int) -> TreeAddress:
        m, q = unpair(n)
        c, sub_i = self.family.factor(n).split_locate(i)
        canonical = self.stage2(m, c).vertex_of(q, sub_i)
        return self.component_address(m, c, canonical)

    def stage1_label(self, w: TreeAddress, m: int) -> int:
        return self.stage1.label_of(w, m)


def two_stage_pipeline(spec: ForestFamilySpec, *, memo_budget: int = 5_000_000) -> TwoStageFactorization:
    """Two-stage factorization of the host tree into copies of the family's forests."""
    return TwoStageFactorization(ForestFamily.from_spec(spec), memo_budget=memo_budget)

