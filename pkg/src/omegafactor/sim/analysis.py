"""Read a finished trace back as factors and invariant reports.

Everything here works from the step records alone, so traces loaded from disk
analyse the same way as live runs.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import pairwise
from typing import Any

import networkx as nx

from omegafactor.engine.window import FACTOR_COLORS
from omegafactor.sim.model import is_adequate
from omegafactor.sim.scheduler import Exhausted, Sigma, SimTrace, StepAction, sigma_json


def placements(trace: SimTrace) -> list[tuple[int, int, int, int]]:
    """(step index, m, j, i) for every assign / put-in-b step."""
    out = []
    for n, s in enumerate(trace.steps):
        if s.action is not StepAction.SKIP and s.j is not None:
            out.append((n, s.m, s.j, s.i))
    return out


def build_factors(trace: SimTrace) -> list[nx.Graph]:
    """F_m: edge j-i for every i placed in C_j^m, on the whole host vertex set."""
    n = trace.config.vertices
    graphs = []
    for _ in range(trace.config.factors):
        g = nx.Graph()
        g.add_nodes_from(range(n))
        graphs.append(g)
    for _, m, j, i in placements(trace):
        graphs[m].add_edge(j, i)
    return graphs


def factors_to_dot(graphs: list[nx.Graph]) -> str:
    lines = ["graph factors {", "  node [shape=circle, fontsize=10];"]
    nodes = sorted(set().union(*(g.nodes for g in graphs))) if graphs else []
    for v in nodes:
        lines.append(f"  {v};")
    for m, g in enumerate(graphs):
        color = FACTOR_COLORS[m % len(FACTOR_COLORS)]
        for a, b in sorted(tuple(sorted(e)) for e in g.edges):
            lines.append(f'  {a} -- {b} [factor={m}, color="{color}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def is_acyclic(g: nx.Graph) -> bool:
    return g.number_of_nodes() == 0 or bool(nx.is_forest(g))


# ── C conditions ──


@dataclass
class CReport:
    c1: bool = True
    c2: bool = True
    c3: bool = True
    # first step index at which a condition broke, per condition name
    first_failure: dict[str, int] = field(default_factory=dict)
    issues: list[str] = field(default_factory=list)
    coverage: float = 1.0
    covered_edges: int = 0
    host_edges: int = 0
    c_min: int = 0
    c_max: int = 0
    d1_pressure: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.c1 and self.c2 and self.c3

    def _fail(self, name: str, step: int, msg: str) -> None:
        setattr(self, name.lower(), False)
        self.first_failure.setdefault(name, step)
        self.issues.append(f"step {step}: {name}: {msg}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "C1": self.c1,
            "C2": self.c2,
            "C3": self.c3,
            "first_failure": dict(self.first_failure),
            "issues": list(self.issues),
            "coverage": self.coverage,
            "covered_edges": self.covered_edges,
            "host_edges": self.host_edges,
            "c_size_min": self.c_min,
            "c_size_max": self.c_max,
            "d1_pressure": dict(self.d1_pressure),
        }


def check_C(trace: SimTrace) -> CReport:
    """C1-C3 checked after every placement; coverage, C set sizes and D1 pressure reported."""
    cfg = trace.config
    report = CReport()
    owner: dict[tuple[int, int], int] = {}  # (m, i) -> j
    members: dict[tuple[int, int], set[int]] = {}  # (m, j) -> C_j^m
    factor_of: dict[tuple[int, int], int] = {}  # (j, i) -> m
    for step, m, j, i in placements(trace):
        if not (j < i and j in cfg.neighbors[i]):
            report._fail("C1", step, f"{i} in C_{j}^{m} but is not a later neighbor of {j}")
        if (m, i) in owner:
            report._fail("C2", step, f"{i} in C_{owner[(m, i)]}^{m} and C_{j}^{m}")
        owner.setdefault((m, i), j)
        if (j, i) in factor_of and factor_of[(j, i)] != m:
            report._fail("C3", step, f"{i} in C_{j}^{factor_of[(j, i)]} and C_{j}^{m}")
        factor_of.setdefault((j, i), m)
        members.setdefault((m, j), set()).add(i)

    host = cfg.edges
    report.host_edges = len(host)
    report.covered_edges = sum(1 for e in host if e in factor_of)
    report.coverage = report.covered_edges / len(host) if host else 1.0

    # C set sizes over every (m, j) where j has a later neighbor
    internal = [j for j in range(cfg.vertices) if any(i > j for i in cfg.neighbors[j])]
    sizes = [len(members.get((m, j), ())) for m in range(cfg.factors) for j in internal]
    report.c_min = min(sizes, default=0)
    report.c_max = max(sizes, default=0)

    # factors each vertex was placed in; a statistic only
    per_vertex = Counter(i for (_, i) in owner)
    counts = [per_vertex.get(i, 0) for i in range(1, cfg.vertices)]
    if counts:
        report.d1_pressure = {
            "min": float(min(counts)),
            "max": float(max(counts)),
            "mean": sum(counts) / len(counts),
        }
    return report


# ── sigma progress ──


@dataclass(frozen=True, slots=True)
class SigmaProgress:
    sequences: dict[int, list[Sigma]]
    increasing: dict[int, bool]
    adequate: bool

    @property
    def ok(self) -> bool | None:
        """None when the instance is too sparse for pass starts to mean anything."""
        if not self.adequate:
            return None
        return all(self.increasing.values())

    @property
    def verdict(self) -> str:
        match self.ok:
            case None:
                return "not adequate"
            case True:
                return "increasing"
        return "stalled"

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "adequate": self.adequate,
            "verdict": self.verdict,
            "factors": {
                str(m): {
                    "pass_starts": [sigma_json(s) for s in seq],
                    "increasing": self.increasing[m],
                }
                for m, seq in self.sequences.items()
            },
        }


def _strictly_increasing(seq: list[Sigma]) -> bool:
    for a, b in pairwise(seq):
        if isinstance(a, Exhausted):
            if not isinstance(b, Exhausted):
                return False
        elif not isinstance(b, Exhausted) and b <= a:
            return False
    return True


def sigma_progress(trace: SimTrace) -> SigmaProgress:
    """sigma^m_tau(0) at each pass start; strictly increasing until exhausted.

    The verdict is only given on adequate instances (see `is_adequate`).
    """
    seqs = {m: trace.pass_starts(m) for m in range(trace.config.factors)}
    return SigmaProgress(
        seqs,
        {m: _strictly_increasing(s) for m, s in seqs.items()},
        adequate=is_adequate(trace.config),
    )


def summary(trace: SimTrace) -> dict[str, Any]:
    graphs = build_factors(trace)
    return {
        "steps": trace.step_count(),
        "actions": dict(Counter(s.action.value for s in trace.steps)),
        "factor_edges": [g.number_of_edges() for g in graphs],
        "acyclic": [is_acyclic(g) for g in graphs],
        "conditions": check_C(trace).to_dict(),
        "sigma": sigma_progress(trace).to_dict(),
    }
