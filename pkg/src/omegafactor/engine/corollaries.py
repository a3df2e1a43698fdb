"""Families derived from the main factorization.

  lambda_factorization(l)   omega factors of omega copies of the l-regular tree
                            (l = 1: perfect matchings; l = 2: double rays)
  pack_family(forests)      pad or regroup a partial family into a full one; the
                            returned mask marks the components realizing the
                            packing, which is the mask's restriction of the full
                            factorization
"""

from __future__ import annotations

from dataclasses import dataclass

from omegafactor.domain import OMEGA, Count, FamilyValidationError
from omegafactor.engine.window import BallMaterialization, WindowEdge
from omegafactor.forests.family import ForestFamily
from omegafactor.forests.spec import (
    ComponentGenerator,
    FactorDescription,
    ForestFamilySpec,
    gen,
    regular_family,
    validate_forests,
)
from omegafactor.logging import get_logger

log = get_logger("corollaries")


def lambda_factorization(degree: Count) -> ForestFamilySpec:
    if degree is not OMEGA and degree < 1:
        raise ValueError(f"lambda must be >= 1 or omega, got {degree}")
    return regular_family(degree)


def _k2_filler() -> ComponentGenerator:
    return gen("regular-tree", "omega", degree=1)


@dataclass(frozen=True, slots=True)
class PackingMask:
    """Per description template: how many leading generators are original (not filler)."""

    originals: tuple[int, ...]

    def covers(self, family: ForestFamily, m: int, position: int) -> bool:
        n = self.originals[family.template_of(m)]
        return family.factor(m).generator_at(position) < n

    def covers_vertex(self, family: ForestFamily, m: int, i: int) -> bool:
        return self.covers(family, m, family.factor(m).component_position(i))

    def restrict(self, window: BallMaterialization) -> list[WindowEdge]:
        """Edges of the window that belong to packed components."""
        fam = window.family
        return [
            e for e in window.edges
            if self.covers_vertex(fam, e.assignment.m, e.assignment.i)
        ]


def pack_family(partial: list[FactorDescription]) -> tuple[ForestFamilySpec, PackingMask]:
    """Turn forests with at most omega components each into a valid family.

    Finite-repeat forests get omega K2 filler components. An omega-repeat forest
    is regrouped: omega copies of it form one factor (every multiplicity becomes
    omega), and there are omega such factors. Without any omega-repeat forest a
    pure-filler factor repeating omega is appended.
    """
    report = validate_forests(partial)
    if not report.ok:
        raise FamilyValidationError(report)
    factors: list[FactorDescription] = []
    originals: list[int] = []
    has_omega = False
    for desc in partial:
        if desc.repeat_count is OMEGA:
            has_omega = True
            comps = [
                ComponentGenerator(kind=g.kind, params=dict(g.params), multiplicity="omega")
                for g in desc.components
            ]
            factors.append(FactorDescription(components=comps, repeat="omega"))
        else:
            comps = [g.model_copy(deep=True) for g in desc.components] + [_k2_filler()]
            factors.append(FactorDescription(components=comps, repeat=desc.repeat))
        originals.append(len(desc.components))
    if not has_omega:
        factors.append(FactorDescription(components=[_k2_filler()], repeat="omega"))
        originals.append(0)
    log.debug("packing_built", inputs=len(partial), templates=len(factors))
    return ForestFamilySpec(factors=factors, name="packing"), PackingMask(tuple(originals))
