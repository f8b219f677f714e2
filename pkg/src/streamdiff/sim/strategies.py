"""Built-in dissemination strategies.

Tree and forest strategies replay a fixed per-chunk schedule; the others
decide slot by slot from the engine view.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field

from ..bound import UNBOUNDED
from ..topology.forest import Forest, single_tree_forest
from ..topology.tree import SOURCE, ScheduledTree
from .engine import SimView, Transmission


def _by_start(tree: ScheduledTree) -> dict[int, list[tuple[int, int]]]:
    out: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for p, c, o in tree.edges():
        out[o - 1].append((p, c))
    return dict(out)


@dataclass
class ForestReplay:
    """Chunk c follows tree (c - 1) mod len(trees), shifted to its generation slot."""

    forest: Forest
    name: str = "serial-forest"
    _plans: list[dict[int, list[tuple[int, int]]]] = field(init=False, repr=False)
    _span: int = field(init=False, repr=False)

    def __post_init__(self):
        self._plans = [_by_start(t) for t in self.forest.trees]
        self._span = max((max(p, default=0) for p in self._plans), default=0)

    def decide(self, view: SimView) -> list[Transmission]:
        U, s = view.U, view.slot
        out = []
        lo = max(1, (s - self._span) // U + 1)
        hi = min(view.chunk_count, s // U + 1)
        for c in range(lo, hi + 1):
            rel = s - (c - 1) * U
            plan = self._plans[(c - 1) % len(self._plans)]
            for sender, receiver in plan.get(rel, ()):
                out.append(Transmission(start=s, sender=sender, receiver=receiver, chunk=c))
        return out


def strategy_serial_tree(tree: ScheduledTree) -> ForestReplay:
    if tree.k != tree.U:
        raise ValueError("serial tree strategy needs k = U; use a forest otherwise")
    return ForestReplay(single_tree_forest(tree), name="serial-tree")


def strategy_serial_forest(forest: Forest) -> ForestReplay:
    return ForestReplay(forest, name="serial-forest")


def balanced_children(v: int, k: int, P: int) -> list[int]:
    """Children of ``v`` in the complete k-ary tree numbered breadth first."""
    first = v * k + 1
    return [c for c in range(first, first + k) if c <= P]


def balanced_depth(v: int, k: int) -> int:
    d = 0
    while v != SOURCE:
        v = (v - 1) // k
        d += 1
    return d


@dataclass
class ParallelBalanced:
    """Complete k-ary tree; every node pushes each chunk to all its children at
    once, sharing its uplink equally, so a batch of m children lasts m slots."""

    U: int
    k: int
    P: int
    name: str = "parallel-balanced"

    def __post_init__(self):
        if self.k != self.U:
            raise ValueError(f"balanced parallel tree needs k = U, got k={self.k}, U={self.U}")
        self._depth = {v: balanced_depth(v, self.k) for v in range(self.P + 1)}

    def arrival(self, v: int) -> int:
        """Per-chunk reception offset of node v (the source holds at 0)."""
        return self._depth[v] * self.k

    def decide(self, view: SimView) -> list[Transmission]:
        out = []
        s = view.slot
        for v in range(self.P + 1):
            kids = balanced_children(v, self.k, self.P)
            if not kids:
                continue
            rel = s - self.arrival(v)
            if rel < 0 or rel % self.U:
                continue
            c = rel // self.U + 1
            if c > view.chunk_count:
                continue
            for r in kids:
                out.append(Transmission(start=s, sender=v, receiver=r, chunk=c, duration=len(kids)))
        return out


def parallel_balanced_count(U: int, t: int) -> int:
    """Peers reached within t in the complete U-ary parallel tree, P unlimited."""
    levels = t // U
    return sum(U**d for d in range(1, levels + 1))


def strategy_parallel_balanced(U: int, k: int, P: int) -> ParallelBalanced:
    return ParallelBalanced(U, k, P)


@dataclass
class Snowball:
    """Unbounded fan-out: the source seeds a fresh peer in each of its U slots
    per chunk, and every idle holder relays its oldest unfinished chunk to
    the lowest-numbered peer still missing it."""

    U: int
    P: int
    name: str = "snowball"
    _next_fresh: dict[int, int] = field(default_factory=dict, init=False, repr=False)

    def _fresh(self, view: SimView, chunk: int) -> int | None:
        r = self._next_fresh.get(chunk, 1)
        while r <= self.P and view.pending(chunk, r):
            r += 1
        self._next_fresh[chunk] = r
        return r if r <= self.P else None

    def decide(self, view: SimView) -> list[Transmission]:
        if view.k is not UNBOUNDED:
            raise ValueError("snowball needs an unbounded neighbour count")
        s = view.slot
        out = []
        # the source serves the chunk of the current period only
        c = s // self.U + 1
        if c <= view.chunk_count:
            r = self._fresh(view, c)
            if r is not None:
                out.append(Transmission(start=s, sender=SOURCE, receiver=r, chunk=c))
                self._next_fresh[c] = r + 1
        for v in range(1, self.P + 1):
            if view.load(v) > 0:
                continue
            for c in view.held(v):
                if view.missing(c) == 0:
                    continue
                r = self._fresh(view, c)
                if r is not None:
                    out.append(Transmission(start=s, sender=v, receiver=r, chunk=c))
                    self._next_fresh[c] = r + 1
                    break
        return out


def strategy_snowball(U: int, P: int) -> Snowball:
    return Snowball(U, P)


@dataclass
class RandomStrategy:
    """Random admissible play, reproducible from ``seed``.

    Each idle node picks a batch size m in 1..cap, then m distinct
    receivers, each with a random held chunk the receiver still lacks.
    Nodes may also stay idle. Only choices the engine would accept are
    drawn, so the engine never aborts the run.
    """

    U: int
    k: object
    P: int
    seed: int
    idle_prob: float = 0.2
    name: str = "random"
    rng: random.Random = field(init=False, repr=False)

    def __post_init__(self):
        self.rng = random.Random(self.seed)
        self.name = f"random-{self.seed}"

    def _draw(self, view: SimView, v: int, held: list[int], taken: set, want: int):
        """Up to ``want`` (receiver, chunk) pairs by rejection sampling."""
        rng = self.rng
        nbrs = view.neighbors(v)
        bounded = self.k is not UNBOUNDED
        picks: dict[int, int] = {}
        for _ in range(2 * want + 2):
            if len(picks) == want:
                break
            if bounded and len(nbrs) + sum(r not in nbrs for r in picks) >= self.k:
                pool = sorted(nbrs | set(picks))
                r = rng.choice(pool)
            else:
                r = rng.randint(1, self.P)
            if r == v or r in picks:
                continue
            lacking = [c for c in held if (c, r) not in taken and not view.pending(c, r)]
            if lacking:
                picks[r] = rng.choice(lacking)
        return list(picks.items())

    def decide(self, view: SimView) -> list[Transmission]:
        rng = self.rng
        s = view.slot
        order = list(range(self.P + 1))
        rng.shuffle(order)
        taken: set[tuple[int, int]] = set()
        out = []
        for v in order:
            if view.load(v) > 0:
                continue
            held = view.held(v)
            if not held or rng.random() < self.idle_prob:
                continue
            cap = self.P - 1 if v else self.P
            if self.k is not UNBOUNDED:
                cap = min(cap, self.k)
            if cap < 1:
                continue
            batch = self._draw(view, v, held, taken, rng.randint(1, min(cap, 4)))
            for r, c in batch:
                taken.add((c, r))
                out.append(Transmission(start=s, sender=v, receiver=r, chunk=c, duration=len(batch)))
        return out


def strategy_random(U: int, k, P: int, seed: int) -> RandomStrategy:
    return RandomStrategy(U, k, P, seed)
