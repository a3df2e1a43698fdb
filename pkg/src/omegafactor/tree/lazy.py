"""The host graph: the omega-regular tree, addressed by son-slot paths.

Nothing is stored. Truncation k limits what `sphere`/`ball` enumerate; every
slot stays addressable through `son`.
"""

from __future__ import annotations

from collections.abc import Iterator
from itertools import product

from omegafactor.domain import ROOT, TreeAddress
from omegafactor.kernel.pairing import level_rank


def parent(w: TreeAddress) -> TreeAddress:
    return w.parent()


def son(w: TreeAddress, s: int) -> TreeAddress:
    return w.son(s)


def depth(w: TreeAddress) -> int:
    return w.depth


def parse_address(text: str) -> TreeAddress:
    return TreeAddress.parse(text)


def format_address(w: TreeAddress) -> str:
    return w.text


def sphere(d: int, k: int) -> Iterator[TreeAddress]:
    """Depth-d addresses with every slot < k, in ascending level rank."""
    if d < 0 or k < 0:
        raise ValueError(f"sphere needs d, k >= 0, got d={d} k={k}")
    if d == 0:
        yield ROOT
        return
    addrs = [TreeAddress(slots) for slots in product(range(k), repeat=d)]
    addrs.sort(key=level_rank)
    yield from addrs


def ball(d: int, k: int) -> Iterator[TreeAddress]:
    """Spheres 0..d in order, so every parent precedes its sons."""
    for r in range(d + 1):
        yield from sphere(r, k)


def ball_size(d: int, k: int) -> int:
    if k == 1:
        return d + 1
    return (k ** (d + 1) - 1) // (k - 1) if k else 1


def in_window(w: TreeAddress, d: int, k: int) -> bool:
    return w.depth <= d and all(s < k for s in w.slots)
