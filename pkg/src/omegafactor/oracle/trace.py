"""Independent replay of a simulator trace.

The replay keeps its own fill counts and placements and re-derives, step by
step, sigma (by scanning square shells n = 0, 1, ... of the (j, y) grid), the
D1-D8 vector at the evaluation point, the action and the chosen j and y. The
first disagreement with the logged record is reported. The final placements are
then checked for C1-C3 and each factor for cycles with union-find.
"""

from __future__ import annotations

from typing import Any

from omegafactor.kernel.pairing import LexTriple
from omegafactor.logging import get_logger
from omegafactor.oracle.report import VerificationReport
from omegafactor.oracle.unionfind import first_cycle_edge
from omegafactor.sim.model import SimConfig
from omegafactor.sim.scheduler import EXHAUSTED, Sigma, SimTrace, StepAction, StepRecord, sigma_json

log = get_logger("oracle")


class _Replay:
    def __init__(self, cfg: SimConfig) -> None:
        self.cfg = cfg
        self.fill: dict[tuple[int, int], int] = {}
        # (m, i) -> (j, "A" | "B")
        self.where: dict[tuple[int, int], tuple[int, str]] = {}

    def sigma(self, m: int) -> Sigma:
        n_max = self.cfg.vertices
        if not any(key[0] == m for key in self.fill):
            return 0
        for n in range(n_max):
            for j in range(n + 1):
                if self.fill.get((m, j), 0) <= n:
                    return n
        return EXHAUSTED

    def vector(self, m: int, tau: int, i: int, j: int, sig: Sigma) -> list[bool]:
        cfg = self.cfg
        y = self.fill.get((m, j), 0)
        cls = cfg.classes[i]
        par = cfg.parents[i]
        x_ok = True
        if cls is not None:
            if par == j and (cls[0] > m or (cls[0] == m and cls[1] > tau)):
                x_ok = False
            if cls[0] == m and cls[1] == tau and par != j:
                x_ok = False
        bounded = sig == EXHAUSTED or (isinstance(sig, int) and max(j, y) <= sig)
        return [
            (m, i) not in self.where,
            i > j and i in cfg.neighbors[j],
            y <= cfg.vertices - 1,
            all(self.where.get((mm, i)) != (j, "A") for mm in range(m)),
            all(self.where.get((mm, i)) != (j, "B") for mm in range(m)),
            x_ok,
            bounded,
        ]

    def decide(self, m: int, tau: int, i: int, sig: Sigma) -> tuple[str, int | None, int | None, list[bool]]:
        free = (m, i) not in self.where
        cands = [j for j in range(i) if j in self.cfg.neighbors[i]]
        if not cands:
            return StepAction.SKIP.value, None, None, [free] + [False] * 7
        vecs = {j: self.vector(m, tau, i, j, sig) for j in cands}
        full = [j for j in cands if all(vecs[j][1:])]
        partial = [j for j in cands if vecs[j][1] and vecs[j][3] and vecs[j][4] and vecs[j][5]]
        if full:
            at, act = full[0], StepAction.ASSIGN
        elif partial:
            at, act = partial[0], StepAction.PUT_IN_B
        else:
            at, act = cands[0], StepAction.SKIP
        if not free:
            act = StepAction.SKIP
        least = bool(full) and full[0] == at
        return act.value, at, self.fill.get((m, at), 0), vecs[at] + [least]

    def apply(self, m: int, i: int, action: str, j: int | None) -> None:
        if j is None:
            return
        if action == StepAction.ASSIGN.value:
            self.fill[(m, j)] = self.fill.get((m, j), 0) + 1
            self.where[(m, i)] = (j, "A")
        elif action == StepAction.PUT_IN_B.value:
            self.where[(m, i)] = (j, "B")


def _scope(trace: SimTrace) -> dict[str, Any]:
    cfg = trace.config
    return {"factors": cfg.factors, "passes": cfg.passes, "vertices": cfg.vertices,
            "steps": len(trace.steps)}


def check_step_order(trace: SimTrace) -> VerificationReport:
    cfg = trace.config
    expected = cfg.factors * cfg.passes * cfg.vertices
    prev: LexTriple | None = None
    for n, s in enumerate(trace.steps):
        if prev is not None and not prev < s.key:
            return VerificationReport.failed(
                "step-order", _scope(trace),
                {"index": n, "step": s.key.as_list(), "previous": prev.as_list(),
                 "reason": "steps not strictly increasing"},
                n,
            )
        prev = s.key
        if not (s.m < cfg.factors and s.tau < cfg.passes and s.i < cfg.vertices):
            return VerificationReport.failed(
                "step-order", _scope(trace),
                {"index": n, "step": s.key.as_list(), "reason": "step outside the truncation"},
                n,
            )
    if len(trace.steps) != expected:
        return VerificationReport.failed(
            "step-order", _scope(trace),
            {"reason": f"{len(trace.steps)} steps, expected {expected}"},
            len(trace.steps),
        )
    return VerificationReport.passed("step-order", _scope(trace), len(trace.steps))


def _logged(s: StepRecord) -> dict[str, Any]:
    return {
        "action": s.action.value,
        "j": s.j,
        "y": s.y,
        "sigma_before": sigma_json(s.sigma_before),
        "sigma_after": sigma_json(s.sigma_after),
        "conditions": list(s.conditions),
    }


def replay(trace: SimTrace) -> VerificationReport:
    rp = _Replay(trace.config)
    for n, s in enumerate(trace.steps):
        if not (0 <= s.i < trace.config.vertices and s.m >= 0 and s.tau >= 0):
            return VerificationReport.failed(
                "replay", _scope(trace),
                {"index": n, "step": s.key.as_list(), "reason": "step outside the truncation"},
                n,
            )
        before = rp.sigma(s.m)
        action, j, y, vec = rp.decide(s.m, s.tau, s.i, before)
        rp.apply(s.m, s.i, action, j)
        want = {
            "action": action,
            "j": j,
            "y": y,
            "sigma_before": sigma_json(before),
            "sigma_after": sigma_json(rp.sigma(s.m)),
            "conditions": vec,
        }
        got = _logged(s)
        for key in ("sigma_before", "conditions", "action", "j", "y", "sigma_after"):
            if got[key] != want[key]:
                return VerificationReport.failed(
                    "replay", _scope(trace),
                    {"index": n, "step": s.key.as_list(), "field": key,
                     "logged": got[key], "expected": want[key]},
                    n,
                )
    return VerificationReport.passed("replay", _scope(trace), len(trace.steps))


def _placements(trace: SimTrace) -> list[tuple[int, int, int]]:
    """(m, i, j) for every logged assign / put-in-b."""
    return [
        (s.m, s.i, s.j)
        for s in trace.steps
        if s.action is not StepAction.SKIP and s.j is not None
    ]


def check_tables(trace: SimTrace) -> VerificationReport:
    """C1-C3 on the logged placements."""
    cfg = trace.config
    owner: dict[tuple[int, int], int] = {}  # (m, i) -> j
    seen: dict[tuple[int, int], int] = {}  # (j, i) -> m
    for m, i, j in _placements(trace):
        if not (j < i and i < cfg.vertices and j in cfg.neighbors[i]):
            return VerificationReport.failed(
                "C1-C3", _scope(trace),
                {"condition": "C1", "factor": m, "vertex": i, "under": j}, len(seen),
            )
        if (m, i) in owner:
            return VerificationReport.failed(
                "C1-C3", _scope(trace),
                {"condition": "C2", "factor": m, "vertex": i, "under": [owner[(m, i)], j]},
                len(seen),
            )
        owner[(m, i)] = j
        if (j, i) in seen:
            return VerificationReport.failed(
                "C1-C3", _scope(trace),
                {"condition": "C3", "factors": [seen[(j, i)], m], "vertex": i, "under": j},
                len(seen),
            )
        seen[(j, i)] = m
    return VerificationReport.passed("C1-C3", _scope(trace), len(seen))


def check_acyclic(trace: SimTrace) -> VerificationReport:
    cfg = trace.config
    per_factor: dict[int, list[tuple[int, int]]] = {}
    for m, i, j in _placements(trace):
        per_factor.setdefault(m, []).append((j, i))
    for m in sorted(per_factor):
        cyc = first_cycle_edge(cfg.vertices, per_factor[m])
        if cyc is not None:
            return VerificationReport.failed(
                "acyclic", _scope(trace), {"factor": m, "edge": list(cyc)}, m,
            )
    return VerificationReport.passed("acyclic", _scope(trace), cfg.factors)


def verify_trace(trace: SimTrace) -> list[VerificationReport]:
    """Step order, independent replay, C1-C3 and acyclicity of every factor."""
    reports = [check_step_order(trace), replay(trace), check_tables(trace), check_acyclic(trace)]
    log.info("trace_verified", steps=len(trace.steps), failed=[r.check for r in reports if not r.ok])
    return reports
