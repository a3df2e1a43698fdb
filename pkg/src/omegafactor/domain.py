"""Core domain types shared across omegafactor.

Plain immutable dataclasses and enums with no I/O. The forest layer, the lazy
engine, the simulator and the oracle all speak these, so the boundaries between
components are typed rather than tuple-shaped.

Counts that may be countably infinite are `Count = int | Omega`; the infinite
value is the explicit marker `OMEGA`, never a sentinel integer.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any


class Omega(str, Enum):
    """The countably infinite cardinal. Serializes as the string "omega"."""

    OMEGA = "omega"

    def __repr__(self) -> str:
        return "OMEGA"


OMEGA = Omega.OMEGA

Count = int | Omega


def count_lt(k: int, c: Count) -> bool:
    """k < c, with every natural below omega."""
    return True if c is OMEGA else k < c


def count_from_json(raw: Any) -> Count:
    if raw == "omega":
        return OMEGA
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise SpecFormatError(f"expected a natural number or \"omega\", got {raw!r}")
    if raw < 0:
        raise SpecFormatError(f"negative count {raw}")
    return raw


# ── Errors ─────────────────────────────────────────────────────────────────


class SpecFormatError(ValueError):
    """A forest-spec document is unparseable or structurally malformed."""


class FamilyValidationError(ValueError):
    """The family violates the forest hypotheses; carries the full report."""

    def __init__(self, report: Any) -> None:
        self.report = report
        lines = "; ".join(v.message for v in report.violations)
        super().__init__(f"invalid forest family: {lines}")


class UnknownFactorError(KeyError):
    pass


class NeighborOutOfRange(IndexError):
    pass


class AddressError(ValueError):
    pass


class PoolIndexError(ValueError):
    pass


class MemoBudgetExceeded(RuntimeError):
    def __init__(self, size: int, budget: int) -> None:
        self.size = size
        self.budget = budget
        super().__init__(f"memo budget exceeded: {size} entries > budget {budget}")


class WindowTooLarge(ValueError):
    pass


class SimConfigError(ValueError):
    """Invalid simulator config. `issues` lists every problem found."""

    def __init__(self, issues: list[str]) -> None:
        self.issues = issues
        super().__init__("invalid simulator config: " + "; ".join(issues))


class TraceFormatError(ValueError):
    pass


class SimulationInvariantError(AssertionError):
    pass


# ── Tree addresses ─────────────────────────────────────────────────────────


@dataclass(frozen=True, slots=True)
class TreeAddress:
    """A vertex of the countably-regular tree: the path of son slots from the root."""

    slots: tuple[int, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.slots)

    @property
    def is_root(self) -> bool:
        return not self.slots

    @property
    def last(self) -> int:
        if not self.slots:
            raise AddressError("the root has no slot")
        return self.slots[-1]

    def parent(self) -> TreeAddress:
        if not self.slots:
            raise AddressError("the root has no parent")
        return TreeAddress(self.slots[:-1])

    def son(self, s: int) -> TreeAddress:
        if s < 0:
            raise AddressError(f"negative son slot {s}")
        return TreeAddress((*self.slots, s))

    def prefix(self, depth: int) -> TreeAddress:
        return TreeAddress(self.slots[:depth])

    @property
    def text(self) -> str:
        return "/" + "/".join(str(s) for s in self.slots)

    @classmethod
    def parse(cls, text: str) -> TreeAddress:
        """Parse "/3/1" style text. "/" is the root."""
        raw = text.strip()
        if not raw.startswith("/"):
            raise AddressError(f"address must start with '/': {text!r}")
        body = raw[1:]
        if body == "":
            return cls()
        out: list[int] = []
        for part in body.split("/"):
            if not part.isdigit():
                raise AddressError(f"bad slot {part!r} in address {text!r}")
            out.append(int(part))
        return cls(tuple(out))

    def __str__(self) -> str:
        return self.text


ROOT = TreeAddress()


# ── Forest-side identifiers ────────────────────────────────────────────────


@dataclass(frozen=True, slots=True, order=True)
class ForestVertex:
    """t^m_i: vertex number i of factor forest m under the canonical enumeration."""

    m: int
    i: int


@dataclass(frozen=True, slots=True, order=True)
class ComponentRef:
    """Component number r of pool d of factor m."""

    m: int
    d: int
    r: int


@dataclass(frozen=True, slots=True)
class EdgeAssignment:
    """The unique factor membership (m, i, j) of a tree edge; always i < j."""

    m: int
    i: int
    j: int

    def __post_init__(self) -> None:
        if not self.i < self.j:
            raise ValueError(f"edge assignment needs i < j, got ({self.m}, {self.i}, {self.j})")

    @classmethod
    def normalized(cls, m: int, a: int, b: int) -> EdgeAssignment:
        return cls(m, min(a, b), max(a, b))

    def as_list(self) -> list[int]:
        return [self.m, self.i, self.j]


@dataclass(frozen=True, slots=True)
class Demand:
    """Continuation k of factor m at some vertex; `target` is the forest index it places."""

    m: int
    k: int
    target: int
