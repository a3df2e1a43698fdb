"""Brute-force son allocation, written from the rule rather than the engine.

Son slot n of w serves the n-th pair (m, k), in ascending pair value, for which
the factor-m label of w has a k-th unplaced neighbor. "Unplaced" means any
neighbor except the label sitting at w's parent. Only the forest degree and
neighbor oracles are used; labels of w come from the caller.
"""

from __future__ import annotations

from collections.abc import Callable

from omegafactor.domain import OMEGA, Demand, TreeAddress
from omegafactor.forests.family import ForestFamily
from omegafactor.kernel.pairing import unpair

LabelFn = Callable[[TreeAddress, int], int]


def unplaced_neighbors(
    family: ForestFamily, label_of: LabelFn, w: TreeAddress, m: int, upto: int
) -> list[int]:
    """Unplaced neighbors of w's factor-m label, ascending; all of them when finitely many,
    else at least the first `upto` + 1."""
    forest = family.factor(m)
    i = label_of(w, m)
    placed = None if w.is_root else label_of(w.parent(), m)
    deg = forest.degree(i)
    if deg is OMEGA:
        # an infinite neighborhood is listed parent first, then ascending
        out: list[int] = []
        n = 0
        while len(out) <= upto:
            v = forest.kth_neighbor(i, n)
            if v != placed:
                out.append(v)
            n += 1
        return out
    nbrs = sorted(forest.kth_neighbor(i, n) for n in range(deg))
    return [v for v in nbrs if v != placed]


def brute_force_allocation(
    family: ForestFamily, label_of: LabelFn, w: TreeAddress, n: int
) -> list[Demand]:
    """The first n demands of w."""
    out: list[Demand] = []
    # m -> (unplaced neighbors known so far, whether that list is complete)
    known: dict[int, tuple[list[int], bool]] = {}
    s = 0
    while len(out) < n:
        m, k = unpair(s)
        s += 1
        nbrs, complete = known.get(m, ([], False))
        if k >= len(nbrs) and not complete:
            complete = family.factor(m).degree(label_of(w, m)) is not OMEGA
            nbrs = unplaced_neighbors(family, label_of, w, m, 2 * k + 1)
            known[m] = (nbrs, complete)
        if k < len(nbrs):
            out.append(Demand(m, k, nbrs[k]))
    return out
