import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from streamdiff.bound import exact_bound
from streamdiff.fib import fib_k
from streamdiff.topology import (
    SOURCE,
    Forest,
    IntertwineAborted,
    IntertwineInfeasible,
    build_forest,
    build_single_tree,
    build_tree_shape,
    check_fanout,
    check_slot_conflicts,
    forest_from_placements,
    forest_shape,
    reception_schedule,
    single_tree_forest,
    solve_intertwining,
    validate_forest,
)


def independent_ok(shape, U, k, placements):
    """Validity straight from the definitions, sharing no code with the package."""
    P = len(shape.offset) - 1
    trees = [{v: v for v in shape.offset}] + [{0: 0, **p} for p in placements]
    used = {v: set() for v in range(P + 1)}
    kids = {v: set() for v in range(P + 1)}
    for tau, name in enumerate(trees):
        if sorted(name.values()) != list(range(P + 1)):
            return False
        for child, par in shape.parent.items():
            sender = name[par]
            start = shape.offset[child] - 1
            r = (tau * U + start) % k
            if r in used[sender]:
                return False
            used[sender].add(r)
            kids[sender].add(name[child])
    return all(len(c) <= k for c in kids.values())


def brute_force_first(U, k, P):
    """Lexicographically first valid placement by enumerating every permutation."""
    shape = forest_shape(U, k, P)
    order = sorted((v for v in shape.offset if v), key=lambda v: (shape.offset[v], v))
    perms = list(itertools.permutations(range(1, P + 1)))
    count = 0
    first = None
    for combo in itertools.product(perms, repeat=k // U - 1):
        placements = [dict(zip(order, perm)) for perm in combo]
        if independent_ok(shape, U, k, placements):
            count += 1
            if first is None:
                first = placements
    return first, count


class TestSingleTree:
    def test_histogram_19(self):
        t = build_single_tree(2, 19)
        assert t.histogram() == {1: 1, 2: 2, 3: 3, 4: 5, 5: 8}
        assert t.cumulative() == [1, 3, 6, 11, 19]

    def test_first_nodes(self):
        t = build_single_tree(2, 3)
        assert t.offset[1] == 1 and t.offset[2] == 2 and t.offset[3] == 2
        assert t.parent[3] == 1 and t.parent[2] == SOURCE

    def test_one_peer(self):
        t = build_single_tree(3, 1)
        assert reception_schedule(t) == {0: 0, 1: 1}

    def test_figure_paths(self):
        t = build_single_tree(2, 19)
        assert t.path(15) == [0, 2, 7, 15]
        assert t.path(19) == [0, 1, 3, 6, 11, 19]
        assert t.offset[15] == t.offset[19] == 5
        assert t.children[1][:2] == (3, 4)
        assert t.children[2] == (5, 7)

    def test_levels_listed_in_text(self):
        t = build_single_tree(2, 19)
        by_offset = {o: sorted(v for v in t.offset if t.offset[v] == o and v) for o in range(1, 6)}
        assert by_offset[1] == [1]
        assert by_offset[2] == [2, 3]
        assert by_offset[3] == [4, 5, 6]
        assert by_offset[4] == [7, 8, 9, 10, 11]

    def test_unbalanced_hops(self):
        t = build_single_tree(2, 19)
        # relays crossed on the way, i.e. edges minus one
        crossed = {t.hops(v) - 1 for v in t.offset if t.offset[v] == 5}
        assert 2 in crossed and 4 in crossed

    def test_source_offset(self):
        assert reception_schedule(build_single_tree(2, 5))[SOURCE] == 0

    @pytest.mark.parametrize("U", [2, 3, 4])
    @pytest.mark.parametrize("P", [1, 2, 7, 50, 333, 5000])
    def test_attains_bound(self, U, P):
        t = build_single_tree(U, P)
        assert not t.check()
        cum = t.cumulative()
        for i, n in enumerate(cum[:-1], start=1):
            assert n == exact_bound((U, U), i)
        assert cum[-1] == P <= exact_bound((U, U), len(cum))

    @pytest.mark.parametrize("U", [2, 3, 4])
    def test_full_frontier_counts(self, U):
        P = exact_bound((U, U), 8)
        hist = build_single_tree(U, P).histogram()
        assert [hist[i] for i in range(1, 9)] == [fib_k(U, i + 1) for i in range(1, 9)]

    def test_rejects(self):
        with pytest.raises(ValueError):
            build_single_tree(2, 0)
        with pytest.raises(ValueError):
            build_single_tree(1, 5)

    @given(U=st.integers(1, 4), extra=st.integers(0, 4), P=st.integers(1, 400))
    @settings(max_examples=60)
    def test_shape_invariants(self, U, extra, P):
        k = max(U, 2) + extra
        t = build_tree_shape(U, k, P)
        assert not t.check()
        assert len(t.children.get(SOURCE, ())) <= U
        assert all(len(cs) <= k for cs in t.children.values())
        assert sorted(t.parent) == list(range(1, P + 1))


class TestForestShape:
    def test_published_first_tree(self):
        s = forest_shape(2, 4, 24)
        assert [s.histogram()[i] for i in range(1, 6)] == [1, 2, 3, 6, 12]
        assert s.children[1] == (3, 4, 7, 13)
        assert s.children[2] == (5, 8, 14)
        assert s.children[5] == (11, 17)

    @pytest.mark.parametrize("U,k", [(2, 4), (2, 6), (3, 6), (1, 2)])
    def test_counts_match_shifted_sums(self, U, k):
        P = exact_bound((U, k), 9)
        hist = forest_shape(U, k, P).histogram()
        for i in range(1, 10):
            assert hist[i] == sum(fib_k(k, i - j + 1) for j in range(1, U + 1))

    def test_rejects(self):
        with pytest.raises(ValueError):
            forest_shape(2, 3, 10)
        with pytest.raises(ValueError):
            forest_shape(2, 2, 10)


class TestForest:
    def test_published_forest(self):
        f = build_forest(2, 4, 24)
        assert len(f.trees) == 2
        for t in f.trees:
            assert [t.histogram()[i] for i in range(1, 6)] == [1, 2, 3, 6, 12]
        assert check_slot_conflicts(f) == []
        assert check_fanout(f) == []
        assert validate_forest(f) == []

    def test_second_tree_fed_by_fresh_neighbours(self):
        f = build_forest(2, 4, 24)
        first, second = (t.children[SOURCE] for t in f.trees)
        assert first == (1, 2)
        assert not set(first) & set(second)

    def test_two_peers(self):
        f = build_forest(2, 4, 2)
        assert [set(t.offset) - {0} for t in f.trees] == [{1, 2}, {1, 2}]
        assert check_slot_conflicts(f) == []
        first, count = brute_force_first(2, 4, 2)
        assert count >= 1

    def test_every_node_in_every_tree(self):
        f = build_forest(2, 6, 24)
        assert len(f.trees) == 3
        for t in f.trees:
            assert sorted(t.offset) == list(range(25))

    def test_tree_of_chunk(self):
        f = build_forest(2, 4, 6)
        assert [f.tree_of_chunk(c) for c in range(1, 6)] == [0, 1, 0, 1, 0]
        assert f.period == 4

    def test_json_round_trip(self):
        f = build_forest(2, 4, 24)
        data = json.loads(f.dumps())
        assert set(data) == {"U", "k", "P", "trees"}
        assert data["trees"][0]["edges"][0] == [0, 1, 1]
        assert Forest.from_json(data) == f


class TestSlotConflicts:
    def test_single_tree_clean(self):
        f = single_tree_forest(build_single_tree(2, 19))
        assert check_slot_conflicts(f) == []

    def test_swap_counterexample(self):
        # node 2 serves at per-chunk starts 2, 3, 4 in the odd tree; put it
        # where the even tree transmits at start 4 (slot 6 + 4n)
        f = build_forest(2, 4, 24)
        even = f.trees[1]
        pos = next(v for v in even.offset if even.offset[v] == 4 and len(even.children.get(v, ())) == 1)
        assert even.transmit_starts(pos) == [4]
        swap = {pos: 2, 2: pos}
        bad = Forest(f.U, f.k, (f.trees[0], even.relabel({v: swap.get(v, v) for v in even.offset})))
        conflicts = check_slot_conflicts(bad)
        hit = [c for c in conflicts if c.node == 2]
        assert hit and hit[0].residue == 2
        assert sorted(hit[0].trees) == [0, 1]
        assert f.trees[0].transmit_starts(2) == [2, 3, 4]

    def test_identity_forest_is_bad(self):
        shape = forest_shape(2, 4, 24)
        f = forest_from_placements(shape, [{v: v for v in shape.offset if v}])
        assert check_slot_conflicts(f)

    def test_leaf_swap_fits_exactly_at_24(self):
        # 12 interior and 12 leaves: swapping roles works at this size only
        shape = forest_shape(2, 4, 24)
        interior = sorted(v for v in shape.offset if v and shape.children.get(v))
        leaves = sorted(v for v in shape.offset if v and not shape.children.get(v))
        assert len(interior) == len(leaves) == 12
        placement = dict(zip(interior, leaves)) | dict(zip(leaves, interior))
        assert validate_forest(forest_from_placements(shape, [placement])) == []

    @pytest.mark.parametrize("t", [6, 7, 8])
    def test_leaf_swap_impossible_at_larger_sizes(self, t):
        P = exact_bound((2, 4), t)
        shape = forest_shape(2, 4, P)
        interior = sorted(v for v in shape.offset if v and shape.children.get(v))
        leaves = sorted(v for v in shape.offset if v and not shape.children.get(v))
        # no room to make every interior node a leaf of the second tree
        assert len(leaves) < len(interior)
        # the search still finds a valid forest by mixing roles
        assert validate_forest(solve_intertwining(2, 4, P).forest) == []


class TestIntertwining:
    @pytest.mark.parametrize(
        "U,k,P",
        [(2, 4, 1), (2, 4, 2), (2, 4, 5), (2, 4, 7), (1, 2, 6), (3, 6, 6), (2, 6, 4), (2, 6, 5)],
    )
    def test_matches_exhaustive_enumeration(self, U, k, P):
        first, count = brute_force_first(U, k, P)
        if first is None:
            with pytest.raises(IntertwineInfeasible):
                solve_intertwining(U, k, P)
            return
        a = solve_intertwining(U, k, P)
        assert list(a.placements) == first

    @pytest.mark.parametrize("P", range(1, 13))
    def test_k6_small(self, P):
        a = solve_intertwining(2, 6, P)
        assert independent_ok(a.shape, 2, 6, a.placements)
        assert validate_forest(a.forest) == []

    @pytest.mark.parametrize("U,k", [(1, 2), (2, 4), (2, 6), (3, 6)])
    @pytest.mark.parametrize("t", range(1, 8))
    def test_attaining_sizes(self, U, k, t):
        P = exact_bound((U, k), t)
        a = solve_intertwining(U, k, P)
        f = a.forest
        assert validate_forest(f) == []
        for tree in f.trees:
            assert tree.cumulative() == [exact_bound((U, k), i) for i in range(1, t + 1)]

    @given(P=st.integers(1, 300), pair=st.sampled_from([(1, 2), (2, 4), (2, 6), (3, 6)]))
    @settings(max_examples=40, deadline=None)
    def test_outputs_always_valid(self, P, pair):
        U, k = pair
        a = solve_intertwining(U, k, P)
        assert check_slot_conflicts(a.forest) == []
        assert check_fanout(a.forest) == []
        assert independent_ok(a.shape, U, k, a.placements)

    def test_deterministic(self):
        a = solve_intertwining(2, 4, 47)
        b = solve_intertwining(2, 4, 47)
        assert a.placements == b.placements

    def test_forced_overloaded_node(self):
        # position 3 of the second tree serves three children at per-chunk
        # starts 2, 3, 4; node 5 already serves 11 and 17 in the first tree
        shape = forest_shape(2, 4, 24)
        assert len(shape.children[3]) == 3
        with pytest.raises(IntertwineInfeasible) as info:
            solve_intertwining(2, 4, 24, forced={(1, 3): 5})
        text = " ".join(info.value.violations)
        assert "residue" in text or "children" in text

    def test_forced_slot_clash_names_residue(self):
        with pytest.raises(IntertwineInfeasible) as info:
            solve_intertwining(2, 4, 24, forced={(1, 7): 2})
        assert any("residue 2 mod 4" in v for v in info.value.violations)

    def test_forced_harmless(self):
        a = solve_intertwining(2, 4, 24, forced={(1, 24): 1})
        assert a.placements[0][24] == 1

    def test_cap_abort_is_distinguished(self):
        with pytest.raises(IntertwineAborted) as info:
            solve_intertwining(2, 4, 24, cap=5)
        assert info.value.stats.expanded > 5

    def test_proved_infeasible(self):
        # pin the same node into two positions of one tree: nothing can work
        with pytest.raises(IntertwineInfeasible) as info:
            solve_intertwining(2, 4, 6, forced={(1, 5): 6, (1, 6): 6})
        assert not isinstance(info.value, IntertwineAborted)

    def test_bad_forced_args(self):
        with pytest.raises(ValueError):
            solve_intertwining(2, 4, 6, forced={(0, 1): 2})
        with pytest.raises(ValueError):
            solve_intertwining(2, 4, 6, forced={(1, 99): 2})
