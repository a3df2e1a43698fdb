"""Simulator configuration: file model, validation, instance builders.

Config JSON:

  {"factors": M, "passes": T, "vertices": N,
   "edges": [[j, i], ...],            host graph over 0..N-1
   "parents": [null, 0, 0, 1, ...],   spanning tree, parents[i] < i
   "partition": "auto" | {"i": [m, t], ...}}

"auto" puts the son of rank r among its parent's sons into class (m, t) with
(m, t, _) = x_partition_decode(r).
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, ValidationError

from omegafactor.domain import SimConfigError
from omegafactor.jsonio import dumps
from omegafactor.kernel.pairing import x_partition_decode


class SimConfigFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    factors: int
    passes: int
    vertices: int
    edges: list[tuple[int, int]]
    parents: list[int | None]
    partition: Literal["auto"] | dict[str, tuple[int, int]] = "auto"


@dataclass(frozen=True, slots=True)
class SimConfig:
    """Validated, normalized simulator input."""

    factors: int
    passes: int
    vertices: int
    # ascending neighbor lists
    neighbors: tuple[tuple[int, ...], ...]
    parents: tuple[int | None, ...]
    # (m, t) of each non-root vertex; None for the root
    classes: tuple[tuple[int, int] | None, ...]
    explicit_partition: bool = False

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(j, i) for i in range(self.vertices) for j in self.neighbors[i] if j < i]

    def lower_neighbors(self, i: int) -> tuple[int, ...]:
        return tuple(j for j in self.neighbors[i] if j < i)

    def to_json(self) -> dict[str, Any]:
        partition: str | dict[str, list[int]]
        if self.explicit_partition:
            partition = {
                str(i): list(cls) for i, cls in enumerate(self.classes) if cls is not None
            }
        else:
            partition = "auto"
        return {
            "factors": self.factors,
            "passes": self.passes,
            "vertices": self.vertices,
            "edges": [list(e) for e in self.edges],
            "parents": list(self.parents),
            "partition": partition,
        }


def build_config(raw: SimConfigFile, *, max_vertices: int = 5000) -> SimConfig:
    """Validate everything and collect all problems into one SimConfigError."""
    issues: list[str] = []
    n = raw.vertices
    for name, v in (("factors", raw.factors), ("passes", raw.passes), ("vertices", n)):
        if v < 0:
            issues.append(f"{name} must be >= 0")
    if n > max_vertices:
        issues.append(f"{n} vertices exceeds the limit {max_vertices}")
    if issues:
        raise SimConfigError(issues)

    adj: list[set[int]] = [set() for _ in range(n)]
    for a, b in raw.edges:
        if not (0 <= a < n and 0 <= b < n) or a == b:
            issues.append(f"edge ({a}, {b}) is not between distinct vertices of 0..{n - 1}")
            continue
        adj[a].add(b)
        adj[b].add(a)

    if len(raw.parents) != n:
        issues.append(f"parents has {len(raw.parents)} entries, expected {n}")
    parents = list(raw.parents[:n]) + [None] * max(0, n - len(raw.parents))
    if n and parents[0] is not None:
        issues.append("vertex 0 is the root and must have parent null")
    for i in range(1, n):
        p = parents[i]
        if p is None:
            issues.append(f"vertex {i} has no parent (the spanning tree is rooted at 0 only)")
        elif not 0 <= p < i:
            issues.append(f"enumeration order violated: parent {p} of vertex {i} must be < {i}")
        elif p not in adj[i]:
            issues.append(f"tree edge ({p}, {i}) is not a host edge")

    classes: list[tuple[int, int] | None] = [None] * n
    explicit = raw.partition != "auto"
    if isinstance(raw.partition, dict):
        for key, (m, t) in raw.partition.items():
            if not key.isdigit() or not 0 < int(key) < n:
                issues.append(f"partition key {key!r} is not a non-root vertex")
                continue
            if m < 0 or t < 0:
                issues.append(f"vertex {key} has a negative class ({m}, {t})")
                continue
            classes[int(key)] = (m, t)
        missing = [i for i in range(1, n) if classes[i] is None]
        if missing:
            issues.append(f"partition incomplete: vertices {missing[:10]} have no class")
    elif not issues:
        rank: dict[int, int] = {}
        for i in range(1, n):
            p = parents[i]
            assert p is not None
            r = rank.get(p, 0)
            rank[p] = r + 1
            m, t, _ = x_partition_decode(r)
            classes[i] = (m, t)

    if issues:
        raise SimConfigError(issues)
    return SimConfig(
        factors=raw.factors,
        passes=raw.passes,
        vertices=n,
        neighbors=tuple(tuple(sorted(s)) for s in adj),
        parents=tuple(parents),
        classes=tuple(classes),
        explicit_partition=explicit,
    )


def parse_config(text: str, *, max_vertices: int = 5000) -> SimConfig:
    try:
        raw = SimConfigFile.model_validate_json(text)
    except ValidationError as e:
        raise SimConfigError([f"bad config structure: {err['loc']}: {err['msg']}" for err in e.errors()]) from e
    return build_config(raw, max_vertices=max_vertices)


def load_config(path: str | Path, *, max_vertices: int = 5000) -> SimConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise SimConfigError([f"cannot read {p}: {e}"]) from e
    return parse_config(text, max_vertices=max_vertices)


def config_text(cfg: SimConfig) -> str:
    return dumps(cfg.to_json())


# ── instance builders ──────────────────────────────────────────────────────


def two_vertex_instance(factors: int = 2, passes: int = 1) -> SimConfig:
    """Edge v0 v1, v1 a son of v0 in class (0, 0)."""
    return build_config(
        SimConfigFile(
            factors=factors,
            passes=passes,
            vertices=2,
            edges=[(0, 1)],
            parents=[None, 0],
            partition={"1": (0, 0)},
        )
    )


def is_adequate(cfg: SimConfig) -> bool:
    """Vertices 0..passes each have at least t + 2 sons in every class (m, t).

    Below that, sigma runs out of populated vertices before the last pass and
    its pass starts stall without being exhausted.
    """
    counts: Counter[tuple[int, tuple[int, int]]] = Counter()
    for i, cls in enumerate(cfg.classes):
        parent = cfg.parents[i]
        if cls is not None and parent is not None and parent <= cfg.passes:
            counts[(parent, cls)] += 1
    return all(
        counts[(j, (m, t))] >= t + 2
        for j in range(cfg.passes + 1)
        for m in range(cfg.factors)
        for t in range(cfg.passes)
    )


def adequate_instance(factors: int = 1, passes: int = 3, internal: int | None = None) -> SimConfig:
    """A tree host where each of the first `internal` vertices has t + 2 sons in
    every class (m, t), m < factors, t < passes; sons are numbered breadth-first
    and grouped by class in (m, t) order. `internal` defaults to passes + 2 and
    must exceed passes."""
    if internal is None:
        internal = passes + 2
    if internal <= passes:
        raise ValueError(f"{internal} internal vertices cannot carry {passes} passes")
    parents: list[int | None] = [None]
    partition: dict[str, tuple[int, int]] = {}
    for j in range(internal):
        for m in range(factors):
            for t in range(passes):
                for _ in range(t + 2):
                    partition[str(len(parents))] = (m, t)
                    parents.append(j)
    n = len(parents)
    edges = [(p, i) for i, p in enumerate(parents) if p is not None]
    return build_config(
        SimConfigFile(
            factors=factors, passes=passes, vertices=n, edges=edges,
            parents=parents, partition=partition,
        )
    )


def random_instance(
    rng: random.Random,
    *,
    vertices: int,
    factors: int,
    passes: int,
    extra_edges: int = 0,
    explicit_partition: bool = False,
) -> SimConfig:
    """Random spanning tree (parent uniform among earlier vertices) plus extra host edges."""
    parents: list[int | None] = [None] + [rng.randrange(i) for i in range(1, vertices)]
    edges = {(p, i) for i, p in enumerate(parents) if p is not None}
    for _ in range(extra_edges):
        if vertices < 2:
            break
        a, b = rng.sample(range(vertices), 2)
        edges.add((min(a, b), max(a, b)))
    partition: Literal["auto"] | dict[str, tuple[int, int]] = "auto"
    if explicit_partition:
        partition = {
            str(i): (rng.randrange(factors + 1), rng.randrange(passes + 1)) for i in range(1, vertices)
        }
    return build_config(
        SimConfigFile(
            factors=factors, passes=passes, vertices=vertices,
            edges=sorted(edges), parents=parents, partition=partition,
        )
    )
