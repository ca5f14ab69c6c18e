import numpy as np
import pytest
from hypothesis import given, settings

from gen import dag_strategy, random_dag_edges
from netident.checkers import corollary3_check, necessary_check, theorem1_check
from netident.covering import (Orientation, Tree, TreeCover, _as_tree, allocate_signals,
                               anti_tree_cover, compatible_tree_cover, cover_compatible,
                               minimal_tree_decomposition, prune_redundant,
                               theorem2_check, tree_cover, validate_cover)
from netident.fixtures import ALLOC20_OVERRIDES, chain, diamond, fixture_model, star
from netident.graph import build_dag
from netident.model import ModelSet, Verdict, make_model

T, A = Orientation.TREE, Orientation.ANTI_TREE


def _edge_sets(cover):
    return sorted(sorted(t.edges) for t in cover.trees)


def test_small_graph_covers():
    c = chain(3).dag
    assert _edge_sets(minimal_tree_decomposition(c)) == [[(1, 2)], [(2, 3)]]
    merged = tree_cover(c)
    assert len(merged) == 1 and merged.trees[0].root == 1
    anti = anti_tree_cover(c)
    assert len(anti) == 1 and anti.trees[0].root == 3 and anti.orientation is A
    assert len(minimal_tree_decomposition(star(3).dag)) == 1
    sink_star = make_model(4, [(1, 4), (2, 4), (3, 4)]).dag
    assert len(anti_tree_cover(sink_star)) == 1


def test_diamond_needs_two_trees():
    d = diamond().dag
    cover = tree_cover(d)
    assert len(cover) == 2 == len(tree_cover(d, exhaustive=True))
    assert not validate_cover(cover, d)


def test_tree_shape_properties():
    t = Tree(1, frozenset({(1, 2), (2, 3), (2, 4)}), T)
    assert t.vertices == {1, 2, 3, 4} and t.leaves == {3, 4} and t.internal == {2}
    anti = Tree(4, frozenset({(1, 4), (2, 4), (3, 1)}), A)
    assert anti.leaves == {2, 3} and anti.internal == {1}
    assert _as_tree(frozenset({(1, 3), (2, 3)}), T) is None
    assert _as_tree(frozenset({(1, 3), (2, 3)}), A).root == 3


def test_validator_flags_each_violation():
    d = diamond().dag
    good = tree_cover(d)
    assert validate_cover(good, d) == []
    two_parents = TreeCover((Tree(1, frozenset(d.edges), T),), T)
    assert any("two parents" in p for p in validate_cover(two_parents, d))
    split = TreeCover((Tree(1, frozenset({(1, 2), (2, 4)}), T), Tree(1, frozenset({(1, 3)}), T),
                       Tree(3, frozenset({(3, 4)}), T)), T)
    assert any("split" in p for p in validate_cover(split, d))
    missing = TreeCover((Tree(1, frozenset({(1, 2), (1, 3), (2, 4)}), T),), T)
    assert any("uncovered" in p for p in validate_cover(missing, d))
    shared = TreeCover(good.trees + (Tree(3, frozenset({(3, 4)}), T),), T)
    assert any("in trees" in p for p in validate_cover(shared, d))
    stray = TreeCover(good.trees + (Tree(4, frozenset({(4, 1)}), T),), T)
    assert any("not in graph" in p for p in validate_cover(stray, d))


def _no_mergeable_pair(cover):
    ts = cover.trees
    return all(_as_tree(ts[a].edges | ts[b].edges, cover.orientation) is None
               for a in range(len(ts)) for b in range(a + 1, len(ts)))


@settings(max_examples=120, deadline=None)
@given(dag_strategy(8))
def test_greedy_and_exhaustive_covers_are_valid(g):
    n, edges = g
    dag = build_dag(n, edges)
    minimal = minimal_tree_decomposition(dag)
    assert len(minimal) == sum(1 for v in dag.vertices if dag.succ[v])
    for build in (tree_cover, anti_tree_cover):
        greedy = build(dag)
        best = build(dag, exhaustive=True)
        assert validate_cover(greedy, dag) == [] and validate_cover(best, dag) == []
        assert len(best) <= len(greedy)
        assert _no_mergeable_pair(greedy)
    assert len(tree_cover(dag)) <= len(minimal)


def test_covering_check_on_seven_vertex_examples():
    a = theorem2_check(fixture_model("trees7"))
    assert a.verdict is Verdict.IDENTIFIABLE
    assert len(a.tree_cover) == 2 and sorted(a.tree_cover.roots) == [1, 5]
    assert a.anti_tree_cover is None
    b = theorem2_check(fixture_model("antitrees7"))
    assert b.verdict is Verdict.IDENTIFIABLE
    assert len(b.anti_tree_cover) == 2 and sorted(b.anti_tree_cover.roots) == [4, 7]
    assert cover_compatible(b.anti_tree_cover, fixture_model("antitrees7"))


def test_covering_check_unknown_cases():
    ms = make_model(3, [(1, 2), (1, 3)], excited=[2, 3], measured=[1, 2, 3])
    assert theorem2_check(ms).verdict is Verdict.UNKNOWN
    assert necessary_check(ms).verdict is Verdict.NOT_IDENTIFIABLE
    partial = chain(3, excited=(1,), measured=(3,))
    rep = theorem2_check(partial)
    assert rep.verdict is Verdict.UNKNOWN and rep.notes


def test_compatible_cover_constraints():
    # a measured vertex may close two trees
    ms = make_model(3, [(1, 3), (2, 3)], excited=[1, 2], measured=[3])
    assert len(compatible_tree_cover(ms)) == 2
    # an unmeasured vertex with two in-neighbours cannot sit inside one tree
    ms = make_model(4, [(1, 3), (2, 3), (3, 4)], excited=[1, 2, 3], measured=[4])
    assert compatible_tree_cover(ms) is None
    # an unmeasured vertex with one in-neighbour is glued below it
    cover = compatible_tree_cover(chain(3, excited=(1, 2), measured=(3,)))
    assert len(cover) == 1 and cover.trees[0].root == 1


def test_twenty_vertex_fixture_counts():
    dag = fixture_model("alloc20").dag
    assert len(minimal_tree_decomposition(dag)) == 16
    cover = tree_cover(dag)
    assert len(cover) == 7 and sorted(cover.roots) == [2, 3, 4, 6, 7, 17, 20]
    assert sorted(cover.leaves) == [3, 5, 6, 7, 8, 9, 10, 11, 12, 13, 15, 16, 18]
    assert len(tree_cover(dag, exhaustive=True)) == 6
    anti = anti_tree_cover(dag)
    assert sorted(anti.roots) == [5, 6, 10, 11, 13, 16, 18, 19] and len(anti) == 8


def test_twenty_vertex_allocation_and_pruning():
    dag = fixture_model("alloc20").dag
    res = allocate_signals(dag, "tree", ALLOC20_OVERRIDES)
    assert res.pattern.excited == {1, 2, 3, 4, 6, 7, 14, 17, 20}
    assert res.pattern.measured == {3, 5, 6, 7, 8, 9, 10, 11, 12, 13, 15, 16, 18, 19}
    pruned = prune_redundant(dag, res, None)
    assert pruned.pruned == {6, 7}
    assert theorem1_check(ModelSet(dag, pruned.pattern)).verdict is Verdict.IDENTIFIABLE
    anti = prune_redundant(dag, allocate_signals(dag, "antitree"), None)
    assert anti.pruned == {6}
    assert corollary3_check(ModelSet(dag, anti.pattern)).verdict is Verdict.IDENTIFIABLE


def test_allocation_rejects_bad_overrides():
    dag = fixture_model("alloc20").dag
    with pytest.raises(ValueError):
        allocate_signals(dag, "tree", {2: "measure"})
    with pytest.raises(ValueError):
        allocate_signals(dag, "tree", {19: "observe"})
    with pytest.raises(ValueError):
        allocate_signals(dag, "sideways")


def test_allocation_properties_on_random_graphs():
    for k in range(120):
        rng = np.random.default_rng([21, k])
        n = int(rng.integers(2, 12))
        dag = build_dag(n, random_dag_edges(rng, n, rng.uniform(0.15, 0.5)))
        for mode in (T, A):
            res = allocate_signals(dag, mode)
            ms = ModelSet(dag, res.pattern)
            assert ms.full_cover and validate_cover(res.cover, dag) == []
            assert cover_compatible(res.cover, ms)
            assert theorem2_check(ms).verdict is Verdict.IDENTIFIABLE
            # unmeasured (resp. unexcited) vertices have at most one in- (resp. out-) neighbour
            for v in dag.vertices:
                if mode is T and v not in ms.measured:
                    assert len(dag.pred[v]) <= 1
                if mode is A and v not in ms.excited:
                    assert len(dag.succ[v]) <= 1
            pruned = prune_redundant(ms, res, None)
            assert pruned.pruned <= res.cover.roots
            assert pruned.signal_count == res.signal_count - len(pruned.pruned)
