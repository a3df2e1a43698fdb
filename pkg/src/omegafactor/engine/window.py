"""Finite windows over the infinite factorization.

`materialize_ball(f, d, k, M)` labels every vertex of ball(d, k) in factors
0..M-1 and records the exact assignment of every edge inside the ball (factor
indices >= M included; they are never clipped). The result is plain data: the
oracle checks it, the exporters print it, and `sub_window` cuts smaller scopes
out of it for counterexample shrinking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Protocol

import networkx as nx

from omegafactor.domain import EdgeAssignment, TreeAddress, WindowTooLarge
from omegafactor.forests.family import ForestFamily
from omegafactor.jsonio import dumps
from omegafactor.logging import get_logger
from omegafactor.tree.lazy import ball, in_window

log = get_logger("window")

# graphviz X11 names, cycled by factor index
FACTOR_COLORS = (
    "red", "blue", "darkgreen", "orange", "purple", "brown",
    "deeppink", "cyan4", "gold3", "gray40",
)


class Factorization(Protocol):
    family: ForestFamily

    def label_of(self, w: TreeAddress, m: int) -> int: ...

    def factor_of_edge(self, w: TreeAddress, s: int) -> EdgeAssignment: ...


@dataclass(frozen=True, slots=True)
class WindowVertex:
    address: TreeAddress
    labels: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class WindowEdge:
    parent: TreeAddress
    slot: int
    assignment: EdgeAssignment

    @property
    def child(self) -> TreeAddress:
        return self.parent.son(self.slot)


@dataclass(frozen=True)
class BallMaterialization:
    radius: int
    sons: int
    factors: int
    vertices: tuple[WindowVertex, ...]
    edges: tuple[WindowEdge, ...]
    family: ForestFamily = field(compare=False, repr=False)

    @cached_property
    def _vertex_map(self) -> dict[TreeAddress, tuple[int, ...]]:
        return {v.address: v.labels for v in self.vertices}

    @cached_property
    def _edge_map(self) -> dict[TreeAddress, WindowEdge]:
        return {e.child: e for e in self.edges}

    def label(self, w: TreeAddress, m: int) -> int | None:
        labels = self._vertex_map.get(w)
        if labels is None or m >= len(labels):
            return None
        return labels[m]

    def edge_to(self, child: TreeAddress) -> WindowEdge | None:
        return self._edge_map.get(child)

    def contains(self, w: TreeAddress) -> bool:
        return w in self._vertex_map

    def is_boundary(self, w: TreeAddress) -> bool:
        return w.depth == self.radius

    def factor_edges(self, m: int) -> list[WindowEdge]:
        return [e for e in self.edges if e.assignment.m == m]

    def factor_graph(self, m: int) -> nx.Graph:
        """Factor m restricted to the window, on all window vertices."""
        g = nx.Graph()
        g.add_nodes_from(v.address.text for v in self.vertices)
        for e in self.factor_edges(m):
            g.add_edge(e.parent.text, e.child.text, i=e.assignment.i, j=e.assignment.j)
        return g

    def sub_window(self, d: int, k: int, factors: int) -> BallMaterialization:
        """The window of a smaller scope, cut out of this one."""
        if d > self.radius or k > self.sons or factors > self.factors:
            raise ValueError("sub_window scope must not exceed the window's")
        verts = tuple(
            WindowVertex(v.address, v.labels[:factors])
            for v in self.vertices
            if in_window(v.address, d, k)
        )
        edges = tuple(e for e in self.edges if in_window(e.child, d, k))
        return BallMaterialization(d, k, factors, verts, edges, self.family)

    # ── export ──

    def to_json(self) -> dict[str, Any]:
        per_factor: dict[str, list[list[int]]] = {str(m): [] for m in range(self.factors)}
        for e in self.edges:
            if e.assignment.m < self.factors:
                per_factor[str(e.assignment.m)].append([e.assignment.i, e.assignment.j])
        return {
            "family": self.family.name,
            "radius": self.radius,
            "sons": self.sons,
            "factors": self.factors,
            "vertex_count": len(self.vertices),
            "edge_count": len(self.edges),
            "vertices": [{"address": v.address.text, "labels": list(v.labels)} for v in self.vertices],
            "edges": [
                {
                    "parent": e.parent.text,
                    "child": e.child.text,
                    "slot": e.slot,
                    "factor": e.assignment.m,
                    "i": e.assignment.i,
                    "j": e.assignment.j,
                }
                for e in self.edges
            ],
            "per_factor": per_factor,
        }

    def to_json_text(self) -> str:
        return dumps(self.to_json())

    def to_dot(self) -> str:
        lines = ["graph ball {", "  node [shape=box, fontsize=10];"]
        for v in self.vertices:
            labels = ",".join(str(i) for i in v.labels)
            lines.append(f'  "{v.address.text}" [label="{v.address.text}\\n{labels}"];')
        for e in self.edges:
            a = e.assignment
            color = FACTOR_COLORS[a.m % len(FACTOR_COLORS)]
            lines.append(
                f'  "{e.parent.text}" -- "{e.child.text}" '
                f'[factor={a.m}, i={a.i}, j={a.j}, color="{color}"];'
            )
        lines.append("}")
        return "\n".join(lines) + "\n"


def materialize_ball(
    f: Factorization, d: int, k: int, factors: int, *, max_depth: int = 6
) -> BallMaterialization:
    if d > max_depth:
        raise WindowTooLarge(f"radius {d} exceeds the configured cap {max_depth} (raise --max-depth)")
    if d < 0 or k < 0 or factors < 0:
        raise ValueError("radius, sons and factors must be >= 0")
    verts: list[WindowVertex] = []
    edges: list[WindowEdge] = []
    for w in ball(d, k):
        verts.append(WindowVertex(w, tuple(f.label_of(w, m) for m in range(factors))))
        if not w.is_root:
            u = w.parent()
            edges.append(WindowEdge(u, w.last, f.factor_of_edge(u, w.last)))
    log.info("ball_materialized", family=f.family.name, radius=d, sons=k, factors=factors,
             vertices=len(verts), edges=len(edges))
    return BallMaterialization(d, k, factors, tuple(verts), tuple(edges), f.family)
