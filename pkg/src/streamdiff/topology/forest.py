"""Multi-tree forests for k > U and the slot-conflict checks between trees."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

from .tree import SOURCE, ScheduledTree, build_tree_shape


@dataclass(frozen=True)
class SlotConflict:
    node: int
    residue: int
    trees: tuple[int, ...]  # 0-based tree index of every clashing transmission
    starts: tuple[int, ...]  # matching per-chunk start offsets


@dataclass(frozen=True)
class FanOutViolation:
    node: int
    children: tuple[int, ...]
    k: int


@dataclass(frozen=True)
class Forest:
    """k/U trees over the same node set; chunk c rides tree (c - 1) mod (k/U).

    Tree ``tau`` carries chunks generated at ``tau*U + m*k``, so a per-chunk
    start offset ``s`` in that tree lands on residue ``(tau*U + s) mod k``.
    """

    U: int
    k: int
    trees: tuple[ScheduledTree, ...]

    @property
    def P(self) -> int:
        return self.trees[0].P

    @property
    def period(self) -> int:
        return self.k

    def tree_of_chunk(self, chunk: int) -> int:
        return (chunk - 1) % len(self.trees)

    def residues(self) -> dict[int, list[tuple[int, int, int]]]:
        """node -> [(residue, tree index, start offset), ...]."""
        out: dict[int, list[tuple[int, int, int]]] = defaultdict(list)
        for tau, tree in enumerate(self.trees):
            for v in tree.children:
                for s in tree.transmit_starts(v):
                    out[v].append(((tau * self.U + s) % self.k, tau, s))
        return out

    def neighbor_sets(self) -> dict[int, set[int]]:
        """Union of each node's children over all trees."""
        out: dict[int, set[int]] = defaultdict(set)
        for tree in self.trees:
            for v, cs in tree.children.items():
                out[v].update(cs)
        return out

    def histograms(self) -> list[dict[int, int]]:
        return [t.histogram() for t in self.trees]

    def to_json(self) -> dict:
        return {
            "U": self.U,
            "k": self.k,
            "P": self.P,
            "trees": [{"edges": [list(e) for e in t.edges()]} for t in self.trees],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, data: dict) -> "Forest":
        U, k = data["U"], data["k"]
        trees = tuple(ScheduledTree.from_edges(U, k, t["edges"]) for t in data["trees"])
        return cls(U=U, k=k, trees=trees)


def single_tree_forest(tree: ScheduledTree) -> Forest:
    return Forest(U=tree.U, k=tree.k, trees=(tree,))


def check_slot_conflicts(forest: Forest) -> list[SlotConflict]:
    conflicts = []
    for v, entries in sorted(forest.residues().items()):
        by_res: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for r, tau, s in entries:
            by_res[r].append((tau, s))
        for r, hits in sorted(by_res.items()):
            if len(hits) > 1:
                conflicts.append(
                    SlotConflict(
                        node=v,
                        residue=r,
                        trees=tuple(h[0] for h in hits),
                        starts=tuple(h[1] for h in hits),
                    )
                )
    return conflicts


def check_fanout(forest: Forest) -> list[FanOutViolation]:
    return [
        FanOutViolation(node=v, children=tuple(sorted(cs)), k=forest.k)
        for v, cs in sorted(forest.neighbor_sets().items())
        if len(cs) > forest.k
    ]


def validate_forest(forest: Forest) -> list[str]:
    """Every invariant failure as a readable line; empty means valid."""
    problems = []
    ids = set(forest.trees[0].offset)
    for tau, tree in enumerate(forest.trees):
        problems += [f"tree {tau}: {p}" for p in tree.check()]
        if set(tree.offset) != ids:
            problems.append(f"tree {tau}: node set differs from tree 0")
    for c in check_slot_conflicts(forest):
        problems.append(
            f"node {c.node}: residue {c.residue} mod {forest.k} used by trees {list(c.trees)}"
        )
    for f in check_fanout(forest):
        problems.append(f"node {f.node}: {len(f.children)} distinct children > k={f.k}")
    return problems


def forest_from_placements(
    shape: ScheduledTree, placements: Sequence[dict[int, int]]
) -> Forest:
    """Tree 0 is ``shape``; tree i+1 puts node placements[i][pos] at position pos."""
    trees = [shape] + [shape.relabel(p) for p in placements]
    return Forest(U=shape.U, k=shape.k, trees=tuple(trees))


def forest_shape(U: int, k: int, P: int) -> ScheduledTree:
    if k <= U:
        raise ValueError(f"a forest needs k > U, got k={k}, U={U}")
    if k % U:
        raise ValueError(f"k={k} is not a multiple of U={U}")
    return build_tree_shape(U, k, P)


def build_forest(U: int, k: int, P: int, **search_kw) -> Forest:
    """Bound-attaining forest: greedy first tree, then intertwined copies."""
    from .intertwine import solve_intertwining

    assignment = solve_intertwining(U, k, P, **search_kw)
    return assignment.forest


def source_children(forest: Forest) -> list[tuple[int, ...]]:
    return [t.children.get(SOURCE, ()) for t in forest.trees]
