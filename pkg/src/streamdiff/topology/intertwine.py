"""Depth-first search for node placements in trees 2..k/U of a forest.

Every tree has the shape of the greedy first tree; only the identity of the
node sitting at each structural position is free. Positions are filled tree
by tree in order of reception offset, so a position's parent is always
placed before the position itself. Candidates are tried in ascending node
id, which makes the first solution found the lexicographically least one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .forest import Forest, forest_from_placements, forest_shape, validate_forest
from .tree import SOURCE, ScheduledTree

DEFAULT_CAP = 10**7


@dataclass
class SearchStats:
    expanded: int = 0
    backtracks: int = 0


class IntertwineError(RuntimeError):
    def __init__(self, msg: str, stats: SearchStats, violations: list[str] | None = None):
        super().__init__(msg)
        self.stats = stats
        self.violations = violations or []


class IntertwineInfeasible(IntertwineError):
    """The search space was exhausted: no placement exists for this P."""


class IntertwineAborted(IntertwineError):
    """The node-expansion cap was hit before the search finished."""


@dataclass(frozen=True)
class IntertwineAssignment:
    shape: ScheduledTree
    placements: tuple[dict[int, int], ...]  # per tree 1.., position -> node
    stats: SearchStats = field(compare=False)

    @property
    def forest(self) -> Forest:
        return forest_from_placements(self.shape, self.placements)


def _position_masks(shape: ScheduledTree, tau: int, U: int, k: int) -> dict[int, int]:
    """Residue bitmask used by each position when it sits in tree ``tau``."""
    masks = {}
    for v in shape.offset:
        m = 0
        for s in shape.transmit_starts(v):
            m |= 1 << ((tau * U + s) % k)
        masks[v] = m
    return masks


def _explain(x, pos, tau, parent_node, need, res_mask, kids, k, res_owner) -> list[str]:
    out = []
    clash = need & res_mask[x]
    for r in range(k):
        if clash >> r & 1:
            out.append(
                f"node {x} at tree {tau} position {pos}: residue {r} mod {k} "
                f"already used in tree {res_owner[x][r]}"
            )
    if x not in kids[parent_node] and len(kids[parent_node]) >= k:
        out.append(
            f"node {parent_node} would serve {len(kids[parent_node]) + 1} distinct "
            f"children > k={k} if {x} became its child"
        )
    return out


def solve_intertwining(
    U: int,
    k: int,
    P: int,
    *,
    cap: int = DEFAULT_CAP,
    forced: dict[tuple[int, int], int] | None = None,
    shape: ScheduledTree | None = None,
) -> IntertwineAssignment:
    """Place nodes 1..P in trees 1..k/U-1 without residue or fan-out clashes.

    ``forced`` pins ``(tree index, position) -> node`` (tree index >= 1). A
    pinned node is the only candidate for its position; if it can never be
    placed there the search fails with the offending constraints in
    ``violations``.
    """
    if shape is None:
        shape = forest_shape(U, k, P)
    T = k // U
    forced = dict(forced or {})
    for (tau, pos), x in forced.items():
        if not 1 <= tau < T:
            raise ValueError(f"forced tree index {tau} outside 1..{T - 1}")
        if pos not in shape.offset or pos == SOURCE:
            raise ValueError(f"forced position {pos} is not a peer position")
        if not 1 <= x <= P:
            raise ValueError(f"forced node {x} outside 1..{P}")
    reserved = [set() for _ in range(T)]
    for (tau, _), x in forced.items():
        reserved[tau].add(x)

    order = sorted((v for v in shape.offset if v != SOURCE), key=lambda v: (shape.offset[v], v))
    slots = [(tau, pos) for tau in range(1, T) for pos in order]
    masks = [_position_masks(shape, tau, U, k) for tau in range(T)]

    # state seeded from tree 0, which is the shape itself
    res_mask = [0] * (P + 1)
    res_owner = [dict() for _ in range(P + 1)]
    kids: list[set[int]] = [set() for _ in range(P + 1)]
    for v in shape.offset:
        res_mask[v] = masks[0][v]
        for r in range(k):
            if masks[0][v] >> r & 1:
                res_owner[v][r] = 0
        kids[v].update(shape.children.get(v, ()))
    used = [set() for _ in range(T)]
    where = [dict({SOURCE: SOURCE}) for _ in range(T)]

    stats = SearchStats()
    # pins that clash with tree 0 or with each other fail on every branch
    static: list[str] = []
    pinned_mask = {x: res_mask[x] for x in set(forced.values())}
    for (tau, pos), x in sorted(forced.items()):
        need = masks[tau][pos]
        clash = need & pinned_mask[x]
        for r in range(k):
            if clash >> r & 1:
                owner = res_owner[x].get(r, "another pinned tree")
                static.append(
                    f"node {x} at tree {tau} position {pos}: residue {r} mod {k} "
                    f"already used in tree {owner}"
                )
        pinned_mask[x] |= need
    if static:
        raise IntertwineInfeasible(f"pinned placements clash for U={U}, k={k}, P={P}", stats, static)
    n = len(slots)
    cursor = [1] * (n + 1)
    placed = [0] * n
    added = [False] * n
    forced_notes: list[str] = []
    depth = 0

    while True:
        if depth == n:
            placements = tuple(
                {pos: where[tau][pos] for pos in order} for tau in range(1, T)
            )
            result = IntertwineAssignment(shape=shape, placements=placements, stats=stats)
            problems = validate_forest(result.forest)
            assert not problems, problems
            return result
        tau, pos = slots[depth]
        need = masks[tau][pos]
        pnode = where[tau][shape.parent[pos]]
        pin = forced.get((tau, pos))
        x = cursor[depth]
        hit = 0
        while x <= P:
            if pin is not None and x != pin:
                if x < pin:
                    x = pin
                    continue
                break
            if (
                x not in used[tau]
                and (pin is not None or x not in reserved[tau])
                and not (need & res_mask[x])
                and (x in kids[pnode] or len(kids[pnode]) < k)
            ):
                hit = x
                break
            if pin is not None and x == pin and not forced_notes:
                forced_notes = _explain(x, pos, tau, pnode, need, res_mask, kids, k, res_owner)
            x += 1
        if hit:
            stats.expanded += 1
            if stats.expanded > cap:
                raise IntertwineAborted(
                    f"aborted after {cap} expansions", stats, forced_notes
                )
            used[tau].add(hit)
            where[tau][pos] = hit
            res_mask[hit] |= need
            for r in range(k):
                if need >> r & 1:
                    res_owner[hit][r] = tau
            added[depth] = hit not in kids[pnode]
            kids[pnode].add(hit)
            placed[depth] = hit
            cursor[depth] = hit + 1
            depth += 1
            if depth < n:
                cursor[depth] = 1
            continue
        # exhausted this slot: undo the previous one
        stats.backtracks += 1
        depth -= 1
        if depth < 0:
            raise IntertwineInfeasible(
                f"no placement exists for U={U}, k={k}, P={P}", stats, forced_notes
            )
        tau, pos = slots[depth]
        x = placed[depth]
        need = masks[tau][pos]
        pnode = where[tau][shape.parent[pos]]
        used[tau].discard(x)
        del where[tau][pos]
        res_mask[x] &= ~need
        for r in range(k):
            if need >> r & 1:
                res_owner[x].pop(r, None)
        if added[depth]:
            kids[pnode].discard(x)
