"""Serialized distribution trees.

A node that completes reception of a chunk at offset ``o`` (time units after
the chunk's generation) serves its children one after another, so its m-th
child (1-based) completes at ``o + m``. The source gets ``U`` serial slots
per chunk; every other node may serve up to ``k`` children.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass
from itertools import accumulate
from typing import Mapping

SOURCE = 0


@dataclass(frozen=True)
class ScheduledTree:
    U: int
    k: int
    parent: Mapping[int, int]
    offset: Mapping[int, int]
    children: Mapping[int, tuple[int, ...]]

    @property
    def P(self) -> int:
        return len(self.offset) - 1

    @property
    def nodes(self) -> list[int]:
        return sorted(self.offset)

    def histogram(self) -> dict[int, int]:
        """Offset -> number of peers completing reception at that offset."""
        counts = Counter(o for v, o in self.offset.items() if v != SOURCE)
        return dict(sorted(counts.items()))

    def cumulative(self, t_max: int | None = None) -> list[int]:
        """N(1..t_max) for one chunk distributed over this tree."""
        hist = self.histogram()
        if t_max is None:
            t_max = max(hist, default=0)
        return list(accumulate(hist.get(t, 0) for t in range(1, t_max + 1)))

    def horizon(self) -> int:
        return max(self.offset.values())

    def hops(self, v: int) -> int:
        h = 0
        while v != SOURCE:
            v = self.parent[v]
            h += 1
        return h

    def path(self, v: int) -> list[int]:
        """Nodes crossed from the source to ``v``, both ends included."""
        out = [v]
        while v != SOURCE:
            v = self.parent[v]
            out.append(v)
        return out[::-1]

    def transmit_starts(self, v: int) -> list[int]:
        """Start offsets of v's serial transmissions, one per child."""
        return [self.offset[c] - 1 for c in self.children.get(v, ())]

    def edges(self) -> list[tuple[int, int, int]]:
        """(parent, child, child offset), ordered by child offset then id."""
        return sorted(
            ((p, c, self.offset[c]) for c, p in self.parent.items()),
            key=lambda e: (e[2], e[1]),
        )

    def relabel(self, mapping: Mapping[int, int]) -> "ScheduledTree":
        """Same shape, node ``x`` renamed to ``mapping[x]``; the source stays 0."""
        m = dict(mapping)
        m[SOURCE] = SOURCE
        return ScheduledTree(
            U=self.U,
            k=self.k,
            parent={m[c]: m[p] for c, p in self.parent.items()},
            offset={m[v]: o for v, o in self.offset.items()},
            children={m[v]: tuple(m[c] for c in cs) for v, cs in self.children.items()},
        )

    @classmethod
    def from_edges(cls, U: int, k: int, edges) -> "ScheduledTree":
        parent, offset, children = {}, {SOURCE: 0}, {}
        for p, c, o in sorted(edges, key=lambda e: (e[2], e[1])):
            parent[c] = p
            offset[c] = o
            children.setdefault(p, []).append(c)
        return cls(
            U=U,
            k=k,
            parent=parent,
            offset=offset,
            children={v: tuple(cs) for v, cs in children.items()},
        )

    def check(self) -> list[str]:
        """Structural problems, empty when the tree is a valid serial schedule."""
        problems = []
        for v, cs in self.children.items():
            cap = self.U if v == SOURCE else self.k
            if len(cs) > cap:
                problems.append(f"node {v} has {len(cs)} children > {cap}")
            for m, c in enumerate(cs, start=1):
                if self.parent.get(c) != v:
                    problems.append(f"node {c} listed under {v} but parent is {self.parent.get(c)}")
                if self.offset[c] != self.offset[v] + m:
                    problems.append(
                        f"child {c} of {v} at offset {self.offset[c]}, expected {self.offset[v] + m}"
                    )
        for c in self.offset:
            if c != SOURCE and c not in self.parent:
                problems.append(f"node {c} has no parent")
        return problems


def build_tree_shape(U: int, k: int, P: int) -> ScheduledTree:
    """Greedy earliest-slot tree over nodes 1..P.

    Repeatedly let the sender with the smallest next free offset (smaller id
    on ties) adopt the next unplaced node as its next serial child. The
    source stops after ``U`` children, everybody else after ``k``. Node ids
    therefore grow with reception offset.
    """
    if U < 1:
        raise ValueError(f"U must be >= 1, got {U}")
    if k < U:
        raise ValueError(f"k={k} must be >= U={U}")
    if P < 1:
        raise ValueError(f"P must be >= 1, got {P}")
    parent: dict[int, int] = {}
    offset = {SOURCE: 0}
    children: dict[int, list[int]] = {SOURCE: []}
    # (next free offset, node id)
    heap = [(0, SOURCE)]
    for v in range(1, P + 1):
        nxt, sender = heapq.heappop(heap)
        parent[v] = sender
        offset[v] = nxt + 1
        children[sender].append(v)
        children[v] = []
        cap = U if sender == SOURCE else k
        if len(children[sender]) < cap:
            heapq.heappush(heap, (nxt + 1, sender))
        heapq.heappush(heap, (offset[v], v))
    return ScheduledTree(
        U=U,
        k=k,
        parent=parent,
        offset=offset,
        children={v: tuple(cs) for v, cs in children.items() if cs},
    )


def build_single_tree(U: int, P: int) -> ScheduledTree:
    """The unbalanced tree for k = U: one tree repeated every U time units."""
    if U < 2:
        raise ValueError(f"single tree needs k = U >= 2, got U={U}")
    return build_tree_shape(U, U, P)


def reception_schedule(tree: ScheduledTree) -> dict[int, int]:
    return dict(tree.offset)
