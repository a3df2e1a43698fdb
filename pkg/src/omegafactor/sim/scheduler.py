"""Finite-truncation scheduler that splits a host graph into regular forests.

Steps (m, tau, i) run in lexicographic order over m < M, tau < T, i < N. At each
step vertex i is offered to the slot tables of factor m:

  assign    i becomes a_j^m(y) for the least j meeting D2-D7 (D1 required)
  put-in-b  otherwise i joins B_j^m for the least j meeting D2, D4, D5, D6
  skip      otherwise

Candidates j are the host neighbors of i below i, ascending. sigma bounds j and
y (D7); it is recomputed before every step from the slot fill counts.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from omegafactor.domain import SimulationInvariantError
from omegafactor.kernel.pairing import LexTriple
from omegafactor.logging import get_logger
from omegafactor.sim.model import SimConfig

log = get_logger("sim")

CONDITION_NAMES = ("D1", "D2", "D3", "D4", "D5", "D6", "D7", "D8")


class Exhausted(str, Enum):
    """Every slot inside the truncation is filled."""

    EXHAUSTED = "exhausted"


EXHAUSTED = Exhausted.EXHAUSTED
Sigma = int | Exhausted


def sigma_json(s: Sigma) -> int | str:
    return s.value if isinstance(s, Exhausted) else s


def sigma_from_json(raw: Any) -> Sigma:
    if raw == EXHAUSTED.value:
        return EXHAUSTED
    if isinstance(raw, int) and not isinstance(raw, bool) and raw >= 0:
        return raw
    raise ValueError(f"sigma must be a natural or {EXHAUSTED.value!r}, got {raw!r}")


class StepAction(str, Enum):
    ASSIGN = "assign"
    PUT_IN_B = "put-in-b"
    SKIP = "skip"


@dataclass(frozen=True, slots=True)
class StepRecord:
    m: int
    tau: int
    i: int
    action: StepAction
    # evaluation point of `conditions`; None when i has no lower neighbor
    j: int | None
    y: int | None
    sigma_before: Sigma
    sigma_after: Sigma
    conditions: tuple[bool, ...]

    @property
    def key(self) -> LexTriple:
        return LexTriple(self.m, self.tau, self.i)

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": "step",
            "step": [self.m, self.tau, self.i],
            "action": self.action.value,
            "j": self.j,
            "y": self.y,
            "sigma_before": sigma_json(self.sigma_before),
            "sigma_after": sigma_json(self.sigma_after),
            "conditions": list(self.conditions),
        }


# ── slot tables ──


class SlotTable:
    """a_j^m(y) columns, B_j^m sets and the per-factor placement index."""

    def __init__(self, factors: int, vertices: int) -> None:
        self.factors = factors
        self.vertices = vertices
        self._slots: list[dict[int, list[int]]] = [{} for _ in range(factors)]
        self._b: list[dict[int, list[int]]] = [{} for _ in range(factors)]
        # m -> vertex -> (j, True for A / False for B)
        self._placed: list[dict[int, tuple[int, bool]]] = [{} for _ in range(factors)]

    def fill(self, m: int, j: int) -> int:
        """Number of defined slots a_j^m(0..)."""
        col = self._slots[m].get(j)
        return 0 if col is None else len(col)

    def slot(self, m: int, j: int, y: int) -> int | None:
        col = self._slots[m].get(j)
        if col is None or y >= len(col):
            return None
        return col[y]

    def placement(self, m: int, i: int) -> tuple[int, bool] | None:
        return self._placed[m].get(i)

    def is_placed(self, m: int, i: int) -> bool:
        return i in self._placed[m]

    def in_a(self, m: int, j: int, i: int) -> bool:
        return self._placed[m].get(i) == (j, True)

    def in_b(self, m: int, j: int, i: int) -> bool:
        return self._placed[m].get(i) == (j, False)

    def a_set(self, m: int, j: int) -> list[int]:
        return list(self._slots[m].get(j, ()))

    def b_set(self, m: int, j: int) -> list[int]:
        return list(self._b[m].get(j, ()))

    def c_set(self, m: int, j: int) -> list[int]:
        return sorted(self.a_set(m, j) + self.b_set(m, j))

    def c_sets(self, m: int) -> Iterator[tuple[int, list[int]]]:
        for j in sorted(set(self._slots[m]) | set(self._b[m])):
            yield j, self.c_set(m, j)

    def assign(self, m: int, j: int, y: int, i: int) -> None:
        if y != self.fill(m, j):
            raise SimulationInvariantError(
                f"slot a_{j}^{m}({y}) breaks gap-free filling (next free is {self.fill(m, j)})"
            )
        self._claim(m, j, i, True)
        self._slots[m].setdefault(j, []).append(i)

    def put_in_b(self, m: int, j: int, i: int) -> None:
        self._claim(m, j, i, False)
        self._b[m].setdefault(j, []).append(i)

    def _claim(self, m: int, j: int, i: int, in_a: bool) -> None:
        prev = self._placed[m].get(i)
        if prev is not None:
            raise SimulationInvariantError(
                f"vertex {i} placed twice in factor {m} (already in C_{prev[0]})"
            )
        for other in range(self.factors):
            hit = self._placed[other].get(i)
            if other != m and hit is not None and hit[0] == j:
                raise SimulationInvariantError(
                    f"vertex {i} would sit in C_{j} of factors {other} and {m}"
                )
        self._placed[m][i] = (j, in_a)

    def set_slot(self, m: int, j: int, column: list[int]) -> None:
        """Install a whole a_j^m column; for building states by hand."""
        self._slots[m][j] = list(column)
        for i in column:
            self._placed[m][i] = (j, True)

    def sigma(self, m: int) -> Sigma:
        """Least n with some undefined a_j^m(y), j, y <= n, scanning j, y < N.

        Columns fill gap-free, so (j, y) with y >= fill(j) are exactly the
        undefined slots and the least such n is min over j of max(j, fill(j)).
        """
        n = self.vertices
        if not self._slots[m]:
            return 0
        best: int | None = None
        for j in range(n):
            if best is not None and j >= best:
                break
            f = self.fill(m, j)
            if f >= n:
                continue
            cand = max(j, f)
            if best is None or cand < best:
                best = cand
        return EXHAUSTED if best is None else best


# ── trace ──


@dataclass
class SimTrace:
    config: SimConfig
    steps: list[StepRecord] = field(default_factory=list)
    # final tables of a live run; None for a trace read back from disk
    table: SlotTable | None = None

    def step_count(self) -> int:
        return len(self.steps)

    def pass_starts(self, m: int) -> list[Sigma]:
        """sigma^m_tau(0) for every pass tau, read off the (m, tau, 0) steps."""
        return [s.sigma_before for s in self.steps if s.m == m and s.i == 0]


# ── conditions ──


def _x_clause(cfg: SimConfig, m: int, tau: int, i: int, j: int) -> bool:
    """i is in no X class of j above (m, tau), and in no (m, tau) class of another vertex."""
    cls = cfg.classes[i]
    if cls is None:
        return True
    owner = cfg.parents[i]
    if owner == j and cls > (m, tau):
        return False
    return not (cls == (m, tau) and owner != j)


def evaluate_at(
    cfg: SimConfig, table: SlotTable, m: int, tau: int, i: int, j: int, sigma: Sigma
) -> tuple[bool, bool, bool, bool, bool, bool, bool]:
    """D1-D7 for candidate j (j is a lower host neighbor of i)."""
    y = table.fill(m, j)
    d1 = not table.is_placed(m, i)
    d2 = j < i and j in cfg.neighbors[i]
    d3 = y < cfg.vertices
    d4 = not any(table.in_a(mm, j, i) for mm in range(m))
    d5 = not any(table.in_b(mm, j, i) for mm in range(m))
    d6 = _x_clause(cfg, m, tau, i, j)
    d7 = isinstance(sigma, Exhausted) or (j <= sigma and y <= sigma)
    return d1, d2, d3, d4, d5, d6, d7


def _decide(
    cfg: SimConfig, table: SlotTable, m: int, tau: int, i: int, sigma: Sigma
) -> tuple[StepAction, int | None, tuple[bool, ...]]:
    candidates = cfg.lower_neighbors(i)
    d1 = not table.is_placed(m, i)
    if not candidates:
        return StepAction.SKIP, None, (d1,) + (False,) * 7

    evals = {j: evaluate_at(cfg, table, m, tau, i, j, sigma) for j in candidates}
    assign_j = next((j for j in candidates if all(evals[j][1:7])), None)
    b_j = next(
        (j for j in candidates if all(evals[j][k] for k in (1, 3, 4, 5))),
        None,
    )
    if assign_j is not None:
        j_eval = assign_j
        action = StepAction.ASSIGN if d1 else StepAction.SKIP
    elif b_j is not None:
        j_eval = b_j
        action = StepAction.PUT_IN_B if d1 else StepAction.SKIP
    else:
        j_eval = candidates[0]
        action = StepAction.SKIP
    d8 = all(evals[j_eval][1:7]) and not any(
        all(evals[j][1:7]) for j in candidates if j < j_eval
    )
    return action, j_eval, evals[j_eval] + (d8,)


def _check_edge(cfg: SimConfig, j: int, i: int) -> None:
    if not (j < i and j in cfg.neighbors[i]):
        raise SimulationInvariantError(f"vertex {i} placed under non-neighbor or later vertex {j}")


# ── run ──


def run(cfg: SimConfig, *, check: bool = True) -> SimTrace:
    """Execute every step (m, tau, i); with `check`, assert D1/D3/C1-C3 after each one."""
    table = SlotTable(cfg.factors, cfg.vertices)
    trace = SimTrace(cfg, table=table)
    log.info("sim_started", factors=cfg.factors, passes=cfg.passes, vertices=cfg.vertices)
    for m in range(cfg.factors):
        for tau in range(cfg.passes):
            for i in range(cfg.vertices):
                before = table.sigma(m)
                action, j, conds = _decide(cfg, table, m, tau, i, before)
                y = None if j is None else table.fill(m, j)
                if action is StepAction.ASSIGN:
                    assert j is not None and y is not None
                    if check:
                        _check_edge(cfg, j, i)
                    table.assign(m, j, y, i)
                elif action is StepAction.PUT_IN_B:
                    assert j is not None
                    if check:
                        _check_edge(cfg, j, i)
                    table.put_in_b(m, j, i)
                trace.steps.append(
                    StepRecord(m, tau, i, action, j, y, before, table.sigma(m), conds)
                )
            log.debug("sim_pass", m=m, tau=tau, sigma=sigma_json(table.sigma(m)))
    log.info("sim_finished", steps=len(trace.steps))
    return trace
