"""Disjoint sets with path compression and union by rank."""

from __future__ import annotations


class UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        """Merge the sets of x and y; False if they were already one set."""
        x_root = self.find(x)
        y_root = self.find(y)
        if x_root == y_root:
            return False
        if self.rank[x_root] < self.rank[y_root]:
            x_root, y_root = y_root, x_root
        self.parent[y_root] = x_root
        if self.rank[x_root] == self.rank[y_root]:
            self.rank[x_root] += 1
        return True

    def is_same(self, x: int, y: int) -> bool:
        return self.find(x) == self.find(y)

    def __repr__(self) -> str:
        return f"UnionFind({self.parent})"


def first_cycle_edge(n: int, edges: list[tuple[int, int]]) -> tuple[int, int] | None:
    """The first edge (in the given order) that closes a cycle, or None for a forest."""
    uf = UnionFind(n)
    for a, b in edges:
        if not uf.union(a, b):
            return a, b
    return None
