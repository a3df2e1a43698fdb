"""Window checks for materialized factorizations.

Each check reads the window data and the forest oracles only:

  E3          every window vertex carries a valid label in every factor < M
  F1          labels are injective per factor (and invert through vertex_of
              when an engine is supplied)
  F2          a window edge is claimed by factor m iff its end labels are
              adjacent in T^m; claimed indices match the end labels
  F3          one assignment per window edge, no (m, i, j) reused
  F4          a label in a pool-d' component sits at depth d' plus its
              distance to the component root; non-root labels have their
              forest parent at the tree parent
  allocation  son slots < k of every inner vertex match brute_force_allocation

Depth-d vertices are exempt from son-side obligations. A failing check is
re-run on smaller scopes (radius, then sons, then factors) and reported at the
smallest scope that still fails.
"""

from __future__ import annotations

from collections.abc import Callable
from typing import Any, Protocol

from omegafactor.domain import OMEGA, TreeAddress
from omegafactor.engine.window import BallMaterialization, materialize_ball
from omegafactor.forests.family import ForestFamily, pool_of_position
from omegafactor.logging import get_logger
from omegafactor.oracle.allocation import brute_force_allocation
from omegafactor.oracle.report import VerificationReport

log = get_logger("oracle")

Check = Callable[[BallMaterialization], VerificationReport]


class _Engine(Protocol):
    family: ForestFamily

    def label_of(self, w: TreeAddress, m: int) -> int: ...

    def vertex_of(self, m: int, i: int) -> TreeAddress: ...


def _scope(ball: BallMaterialization, **extra: Any) -> dict[str, Any]:
    return {
        "family": ball.family.name,
        "radius": ball.radius,
        "sons": ball.sons,
        "factors": ball.factors,
        **extra,
    }


def _distance_to_root(family: ForestFamily, m: int, i: int) -> int:
    forest = family.factor(m)
    steps = 0
    p = forest.parent_of(i)
    while p is not None:
        steps += 1
        p = forest.parent_of(p)
    return steps


# ── individual checks ──


def check_spanning(ball: BallMaterialization) -> VerificationReport:
    n = 0
    for v in ball.vertices:
        if len(v.labels) != ball.factors:
            return VerificationReport.failed(
                "E3", _scope(ball),
                {"vertex": v.address.text, "condition": "E3",
                 "reason": f"{len(v.labels)} labels for {ball.factors} factors"},
                n,
            )
        for m, i in enumerate(v.labels):
            n += 1
            if i < 0:
                return VerificationReport.failed(
                    "E3", _scope(ball),
                    {"vertex": v.address.text, "factor": m, "label": i, "condition": "E3",
                     "reason": "label is not a vertex of the factor forest"},
                    n,
                )
    return VerificationReport.passed("E3", _scope(ball), n)


def check_exactly_once(ball: BallMaterialization, engine: _Engine | None = None) -> VerificationReport:
    seen: dict[tuple[int, int], TreeAddress] = {}
    n = 0
    for v in ball.vertices:
        for m, i in enumerate(v.labels):
            n += 1
            other = seen.get((m, i))
            if other is not None:
                return VerificationReport.failed(
                    "F1", _scope(ball),
                    {"vertex": v.address.text, "factor": m, "label": i, "condition": "F1",
                     "reason": f"label already carried by {other.text}"},
                    n,
                )
            seen[(m, i)] = v.address
            if engine is not None and engine.vertex_of(m, i) != v.address:
                return VerificationReport.failed(
                    "F1", _scope(ball),
                    {"vertex": v.address.text, "factor": m, "label": i, "condition": "F1",
                     "reason": f"vertex_of gives {engine.vertex_of(m, i).text}"},
                    n,
                )
    return VerificationReport.passed("F1", _scope(ball), n)


def check_adjacency(ball: BallMaterialization) -> VerificationReport:
    fam = ball.family
    n = 0
    for e in ball.edges:
        a = e.assignment
        child = e.child
        n += 1
        if not fam.factor(a.m).adjacent(a.i, a.j):
            return VerificationReport.failed(
                "F2", _scope(ball),
                {"edge": [e.parent.text, child.text], "assignment": a.as_list(), "condition": "F2",
                 "reason": "assigned labels are not adjacent in their forest"},
                n,
            )
        for m in range(ball.factors):
            li = ball.label(e.parent, m)
            lj = ball.label(child, m)
            if li is None or lj is None:
                continue
            claimed = a.m == m
            adjacent = fam.factor(m).adjacent(li, lj)
            if claimed != adjacent or (claimed and {li, lj} != {a.i, a.j}):
                return VerificationReport.failed(
                    "F2", _scope(ball),
                    {"edge": [e.parent.text, child.text], "factor": m, "labels": [li, lj],
                     "assignment": a.as_list(), "condition": "F2",
                     "reason": "claimed edge does not join its labels" if claimed
                     else "adjacent labels on an edge of another factor"},
                    n,
                )
    return VerificationReport.passed("F2", _scope(ball), n)


def check_unique_ownership(ball: BallMaterialization) -> VerificationReport:
    expected = {v.address for v in ball.vertices if not v.address.is_root}
    owners: dict[TreeAddress, int] = {}
    triples: dict[tuple[int, int, int], TreeAddress] = {}
    for e in ball.edges:
        child = e.child
        if child in owners:
            return VerificationReport.failed(
                "F3", _scope(ball),
                {"edge": [e.parent.text, child.text], "condition": "F3",
                 "reason": "edge assigned twice"},
                len(owners),
            )
        owners[child] = e.assignment.m
        key = (e.assignment.m, e.assignment.i, e.assignment.j)
        if key in triples:
            return VerificationReport.failed(
                "F3", _scope(ball),
                {"edge": [e.parent.text, child.text], "assignment": list(key), "condition": "F3",
                 "reason": f"triple also owns the edge to {triples[key].text}"},
                len(owners),
            )
        triples[key] = child
    missing = sorted(expected - owners.keys(), key=lambda w: w.slots)
    if missing:
        w = missing[0]
        return VerificationReport.failed(
            "F3", _scope(ball),
            {"edge": [w.parent().text, w.text], "condition": "F3", "reason": "edge has no assignment"},
            len(owners),
        )
    return VerificationReport.passed("F3", _scope(ball), len(owners))


def check_depth_law(ball: BallMaterialization) -> VerificationReport:
    fam = ball.family
    n = 0
    for v in ball.vertices:
        w = v.address
        for m, i in enumerate(v.labels):
            n += 1
            forest = fam.factor(m)
            pool, _ = pool_of_position(forest.component_position(i))
            dist = _distance_to_root(fam, m, i)
            if forest.local_height(i) != dist:
                return VerificationReport.failed(
                    "F4", _scope(ball),
                    {"vertex": w.text, "factor": m, "label": i, "condition": "F4",
                     "reason": f"local height {forest.local_height(i)} but {dist} parent steps"},
                    n,
                )
            if w.depth != pool + dist:
                return VerificationReport.failed(
                    "F4", _scope(ball),
                    {"vertex": w.text, "factor": m, "label": i, "condition": "F4",
                     "reason": f"depth {w.depth} but pool {pool} + distance {dist}"},
                    n,
                )
            up = forest.parent_of(i)
            if up is not None and not w.is_root and ball.label(w.parent(), m) != up:
                return VerificationReport.failed(
                    "F4", _scope(ball),
                    {"vertex": w.text, "factor": m, "label": i, "condition": "F4",
                     "reason": f"forest parent {up} is not at the tree parent"},
                    n,
                )
    return VerificationReport.passed("F4", _scope(ball), n)


def check_allocation(ball: BallMaterialization, engine: _Engine) -> VerificationReport:
    """Inner vertices: edge at son slot s matches the s-th brute-force demand."""
    n = 0
    for v in ball.vertices:
        w = v.address
        if ball.is_boundary(w) or ball.sons == 0:
            continue
        demands = brute_force_allocation(ball.family, engine.label_of, w, ball.sons)
        for s, dem in enumerate(demands):
            n += 1
            e = ball.edge_to(w.son(s))
            if e is None:
                continue
            a = e.assignment
            got = {a.i, a.j}
            want = {engine.label_of(w, dem.m), dem.target}
            if a.m != dem.m or got != want:
                return VerificationReport.failed(
                    "allocation", _scope(ball),
                    {"vertex": w.text, "slot": s, "condition": "allocation",
                     "expected": [dem.m, dem.k, dem.target], "assignment": a.as_list()},
                    n,
                )
    return VerificationReport.passed("allocation", _scope(ball), n)


def check_demand_prefix(ball: BallMaterialization, engine: Any, n: int) -> VerificationReport:
    """The engine's first n demands at every window vertex equal the brute-force ones."""
    checked = 0
    for v in ball.vertices:
        w = v.address
        want = brute_force_allocation(ball.family, engine.label_of, w, n)
        got = [engine.demand_at(w, s) for s in range(n)]
        checked += 1
        if got != want:
            s = next(s for s, (a, b) in enumerate(zip(got, want, strict=True)) if a != b)
            return VerificationReport.failed(
                "demands", _scope(ball, prefix=n),
                {"vertex": w.text, "slot": s, "condition": "allocation",
                 "engine": [got[s].m, got[s].k, got[s].target],
                 "expected": [want[s].m, want[s].k, want[s].target]},
                checked,
            )
    return VerificationReport.passed("demands", _scope(ball, prefix=n), checked)


# ── shrinking ──


def shrink(ball: BallMaterialization, check: Check, report: VerificationReport) -> VerificationReport:
    """Smallest (radius, sons, factors) sub-window on which `check` still fails."""
    best = report
    d, k, mm = ball.radius, ball.sons, ball.factors
    for dim in range(3):
        while True:
            cand = [d, k, mm]
            if cand[dim] == 0:
                break
            cand[dim] -= 1
            r = check(ball.sub_window(*cand))
            if r.ok:
                break
            d, k, mm = cand
            best = r
    if best is not report:
        log.debug("counterexample_shrunk", check=report.check, radius=d, sons=k, factors=mm)
    return best


def verify_window(
    ball: BallMaterialization,
    engine: _Engine | None = None,
    *,
    shrink_failures: bool = True,
    demand_prefix: int = 0,
) -> list[VerificationReport]:
    """E3, F1-F4 on the window, plus the allocation differentials when an engine is given."""
    checks: list[Check] = [
        check_spanning,
        lambda b: check_exactly_once(b, engine),
        check_adjacency,
        check_unique_ownership,
        check_depth_law,
    ]
    if engine is not None:
        eng = engine
        checks.append(lambda b: check_allocation(b, eng))
        if demand_prefix > 0:
            checks.append(lambda b: check_demand_prefix(b, eng, demand_prefix))
    reports = []
    for check in checks:
        r = check(ball)
        if not r.ok and shrink_failures:
            r = shrink(ball, check, r)
        reports.append(r)
    bad = [r.check for r in reports if not r.ok]
    log.info("window_verified", family=ball.family.name, radius=ball.radius, sons=ball.sons,
             factors=ball.factors, failed=bad)
    return reports


def verify_pipeline_window(
    pipeline: Any, d: int, k: int, factors: int, *, max_depth: int = 6, shrink_failures: bool = True
) -> list[VerificationReport]:
    """E3, F1, F2, F3 on the composed window, and E3/F1 on the stage-1 window."""
    composed = materialize_ball(pipeline, d, k, factors, max_depth=max_depth)
    stage1 = materialize_ball(pipeline.stage1, d, k, factors, max_depth=max_depth)
    reports: list[VerificationReport] = []
    for ball, checks, stage in (
        (composed, [check_spanning, lambda b: check_exactly_once(b, pipeline),
                    check_adjacency, check_unique_ownership], "composed"),
        (stage1, [check_spanning, lambda b: check_exactly_once(b, pipeline.stage1)], "stage1"),
    ):
        for check in checks:
            r = check(ball)
            if not r.ok and shrink_failures:
                r = shrink(ball, check, r)
            reports.append(
                VerificationReport(r.check, {**r.scope, "stage": stage}, r.ok, r.counterexample,
                                   r.checked, r.notes)
            )
    log.info("pipeline_window_verified", radius=d, sons=k, factors=factors,
             failed=[r.check for r in reports if not r.ok])
    return reports


def exact_slot_degree(engine: Any, w: TreeAddress, m: int, upto: int) -> int:
    """Edges of factor m at w found at the exact slots of continuations k < upto,
    plus the parent edge when factor m claims it."""
    forest = engine.family.factor(m)
    n_cont = forest.n_continuations(engine.label_of(w, m))
    limit = upto if n_cont is OMEGA else min(upto, n_cont)
    deg = 0
    for kk in range(limit):
        s = engine.slot_of(w, m, kk)
        if engine.factor_of_edge(w, s).m == m:
            deg += 1
    if not w.is_root and engine.factor_of_edge(w.parent(), w.last).m == m:
        deg += 1
    return deg
