"""Shared test fixtures."""

from __future__ import annotations

import pytest

from omegafactor.domain import TreeAddress
from omegafactor.engine.factorization import FactorizationEngine
from omegafactor.forests.family import ForestFamily
from omegafactor.forests.spec import builtin_spec


def family(name: str) -> ForestFamily:
    spec = builtin_spec(name)
    assert spec is not None, name
    return ForestFamily.from_spec(spec)


def engine(name: str) -> FactorizationEngine:
    return FactorizationEngine(family(name))


def addr(text: str) -> TreeAddress:
    return TreeAddress.parse(text)


@pytest.fixture
def k2() -> FactorizationEngine:
    return engine("k2-family")


@pytest.fixture
def lambda3() -> FactorizationEngine:
    return engine("lambda:3")


@pytest.fixture
def star_mix() -> FactorizationEngine:
    return engine("star-mix")


@pytest.fixture
def mixed_trees() -> FactorizationEngine:
    return engine("mixed-trees")
