"""Disjoint tree / anti-tree coverings and actuator-sensor allocation.

A tree covering assigns every vertex's outgoing edges to one tree. It is
fully described by which in-edge (if any) each vertex is "glued" through,
i.e. the edge by which its out-edges hang below another tree. Anti-trees are
handled by running the same machinery on the transpose graph.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .checkers import DEFAULT_BUDGET, corollary3_check, theorem1_check
from .graph import Dag, Edge, transpose
from .model import ModelSet, SignalPattern, Verdict, transpose_model


class Orientation(enum.Enum):
    TREE = "tree"
    ANTI_TREE = "antitree"


@dataclass(frozen=True)
class Tree:
    """A directed tree given by its root and edge set (edges in graph orientation).

    For an anti-tree the root is the unique vertex every other vertex drains into.
    """

    root: int
    edges: frozenset[Edge]
    orientation: Orientation = Orientation.TREE

    def _oriented(self) -> list[Edge]:
        if self.orientation is Orientation.TREE:
            return list(self.edges)
        return [(j, i) for i, j in self.edges]

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for e in self.edges for v in e) | {self.root}

    @property
    def leaves(self) -> frozenset[int]:
        tails = {i for i, _ in self._oriented()}
        return frozenset(j for _, j in self._oriented() if j not in tails)

    @property
    def internal(self) -> frozenset[int]:
        return self.vertices - self.leaves - {self.root}


@dataclass(frozen=True)
class TreeCover:
    trees: tuple[Tree, ...]
    orientation: Orientation = Orientation.TREE

    @property
    def roots(self) -> frozenset[int]:
        return frozenset(t.root for t in self.trees)

    @property
    def leaves(self) -> frozenset[int]:
        return frozenset().union(*(t.leaves for t in self.trees))

    @property
    def internal(self) -> frozenset[int]:
        return frozenset().union(*(t.internal for t in self.trees))

    def tree_of(self) -> dict[Edge, int]:
        """Map each edge to the index of the tree holding it."""
        return {e: k for k, t in enumerate(self.trees) for e in t.edges}

    def __len__(self) -> int:
        return len(self.trees)


def _as_tree(edges: frozenset[Edge], orientation: Orientation) -> Optional[Tree]:
    """Return the tree spanned by ``edges`` or None if they do not form one."""
    oriented = edges if orientation is Orientation.TREE else {(j, i) for i, j in edges}
    heads: set[int] = set()
    tails: set[int] = set()
    for i, j in oriented:
        if j in heads:
            return None
        heads.add(j)
        tails.add(i)
    roots = tails - heads
    if len(roots) != 1:
        return None
    return Tree(next(iter(roots)), frozenset(edges), orientation)


def validate_cover(cover: TreeCover, dag: Dag) -> list[str]:
    """Independent check of every covering invariant; returns the violations found."""
    problems = []
    seen: dict[Edge, int] = {}
    for k, t in enumerate(cover.trees):
        if t.orientation is not cover.orientation:
            problems.append(f"tree {k} has mixed orientation")
        if not t.edges:
            problems.append(f"tree {k} is empty")
            continue
        oriented = t._oriented()
        indeg: dict[int, int] = {}
        for i, j in oriented:
            indeg[j] = indeg.get(j, 0) + 1
        if any(d > 1 for d in indeg.values()):
            problems.append(f"tree {k} has a vertex with two parents")
        if t.root in indeg:
            problems.append(f"tree {k} root {t.root} has a parent")
        # every vertex must trace back to the root
        parent = {j: i for i, j in oriented}
        for v in t.vertices:
            hops = 0
            while v in parent and hops <= len(oriented):
                v = parent[v]
                hops += 1
            if v != t.root:
                problems.append(f"tree {k} is not rooted at {t.root}")
                break
        for e in t.edges:
            if e not in dag.edges:
                problems.append(f"tree {k} edge {e} not in graph")
            if e in seen:
                problems.append(f"edge {e} in trees {seen[e]} and {k}")
            seen[e] = k
    missing = dag.edges - set(seen)
    if missing:
        problems.append(f"uncovered edges {sorted(missing)}")
    # grouping: a vertex's out-edges (in-edges for anti-trees) share one tree
    groups: dict[int, set[int]] = {}
    for e, k in seen.items():
        owner = e[0] if cover.orientation is Orientation.TREE else e[1]
        groups.setdefault(owner, set()).add(k)
    for v, ks in sorted(groups.items()):
        if len(ks) > 1:
            problems.append(f"edges grouped at vertex {v} split over trees {sorted(ks)}")
    return problems


# ---------------------------------------------------------------------------
# covers: minimal trees, then greedy merging


def minimal_tree_decomposition(dag: Dag) -> TreeCover:
    """One tree per vertex with out-degree >= 1: the vertex and its out-edges."""
    trees = tuple(Tree(v, frozenset((v, w) for w in dag.succ[v]))
                  for v in dag.vertices if dag.succ[v])
    return TreeCover(trees, Orientation.TREE)


def _merge_key(t: Tree):
    return (-len(t.edges), t.root)


def merge_cover(cover: TreeCover, dag: Dag | None = None, exhaustive: bool = False) -> TreeCover:
    """Merge trees pairwise while the union of two trees is still a tree.

    Pairs are scanned larger tree first, ties by smaller root, and the first
    valid merge is taken before rescanning. ``exhaustive`` instead returns a
    cover with the fewest trees (feasible up to about a dozen trees); it
    needs ``dag``.
    """
    if exhaustive:
        if dag is None:
            raise ValueError("exhaustive merging needs the graph")
        return _minimum_cover(cover, dag)
    trees = list(cover.trees)
    while True:
        order = sorted(trees, key=_merge_key)
        merged = None
        for a in range(len(order)):
            for b in range(a + 1, len(order)):
                union = _as_tree(order[a].edges | order[b].edges, cover.orientation)
                if union is not None:
                    merged = (order[a], order[b], union)
                    break
            if merged:
                break
        if merged is None:
            return TreeCover(tuple(sorted(order, key=lambda t: t.root)), cover.orientation)
        first, second, union = merged
        trees = [t for t in order if t is not first and t is not second] + [union]


def _groups(cover: TreeCover) -> dict[int, frozenset[Edge]]:
    owner = (lambda e: e[0]) if cover.orientation is Orientation.TREE else (lambda e: e[1])
    out: dict[int, set[Edge]] = {}
    for t in cover.trees:
        for e in t.edges:
            out.setdefault(owner(e), set()).add(e)
    return {v: frozenset(es) for v, es in out.items()}


def _trees_from_glue(dag: Dag, glue: Mapping[int, Edge]) -> Optional[list[frozenset[Edge]]]:
    """Assemble the trees implied by gluing choices on a tree-oriented graph.

    Returns None if some vertex ends up with two parents inside one tree.
    """
    parent: dict[int, int] = {}

    def find(v: int) -> int:
        while parent.get(v, v) != v:
            v = parent[v]
        return v

    owners = [v for v in dag.vertices if dag.succ[v]]
    for v in owners:
        parent[v] = v
    for v, (u, _) in glue.items():
        parent[find(v)] = find(u)
    buckets: dict[int, set[Edge]] = {}
    for v in owners:
        buckets.setdefault(find(v), set()).update((v, w) for w in dag.succ[v])
    trees = []
    for edges in buckets.values():
        heads = [j for _, j in edges]
        if len(heads) != len(set(heads)):
            return None
        trees.append(frozenset(edges))
    return trees


def _minimum_cover(cover: TreeCover, dag: Dag) -> TreeCover:
    work = dag if cover.orientation is Orientation.TREE else transpose(dag)
    choices = [v for v in work.vertices if work.succ[v] and work.pred[v]]
    best: list = [None, len(choices) + len(work.vertices) + 1]

    def dfs(idx: int, glue: dict[int, Edge]) -> None:
        n_trees = sum(1 for v in work.vertices if work.succ[v]) - len(glue)
        if n_trees - (len(choices) - idx) >= best[1]:
            return
        if _trees_from_glue(work, glue) is None:
            return
        if idx == len(choices):
            best[0], best[1] = dict(glue), n_trees
            return
        v = choices[idx]
        for u in work.pred[v]:
            glue[v] = (u, v)
            dfs(idx + 1, glue)
            del glue[v]
        dfs(idx + 1, glue)

    dfs(0, {})
    trees = _trees_from_glue(work, best[0])
    return _cover_from_tree_edges(trees, cover.orientation)


def _cover_from_tree_edges(edge_sets, orientation: Orientation) -> TreeCover:
    trees = []
    for es in edge_sets:
        t = _as_tree(es, Orientation.TREE)
        if orientation is Orientation.ANTI_TREE:
            t = Tree(t.root, frozenset((j, i) for i, j in es), Orientation.ANTI_TREE)
        trees.append(t)
    return TreeCover(tuple(sorted(trees, key=lambda t: t.root)), orientation)


def _flip(cover: TreeCover) -> TreeCover:
    """Reinterpret a cover of the transpose graph on the original graph."""
    other = Orientation.ANTI_TREE if cover.orientation is Orientation.TREE else Orientation.TREE
    return TreeCover(tuple(Tree(t.root, frozenset((j, i) for i, j in t.edges), other)
                           for t in cover.trees), other)


def tree_cover(dag: Dag, exhaustive: bool = False) -> TreeCover:
    return merge_cover(minimal_tree_decomposition(dag), dag, exhaustive)


def anti_tree_cover(dag: Dag, exhaustive: bool = False) -> TreeCover:
    """Anti-tree cover: a tree cover of the transpose graph mapped back."""
    return _flip(tree_cover(transpose(dag), exhaustive))


# ---------------------------------------------------------------------------
# covering-based identifiability


@dataclass
class CoveringReport:
    """Outcome of the covering check; either compatible cover is a witness."""

    verdict: Verdict
    tree_cover: Optional[TreeCover] = None
    anti_tree_cover: Optional[TreeCover] = None
    notes: list[str] = field(default_factory=list)

    @property
    def cover(self) -> Optional[TreeCover]:
        return self.tree_cover if self.tree_cover is not None else self.anti_tree_cover


def compatible_tree_cover(ms: ModelSet, limit: int = 100_000) -> Optional[TreeCover]:
    """A tree cover with excited roots and measured leaves, or None.

    Searches gluing choices: an unexcited vertex must hang below one of its
    in-neighbours' trees; an unmeasured one must additionally have a single
    in-neighbour so that it is never a leaf.
    """
    dag, R, C = ms.dag, ms.excited, ms.measured
    forced: dict[int, Edge] = {}
    branching: list[int] = []
    for v in dag.vertices:
        ins, outs = dag.pred[v], dag.succ[v]
        if not ins and not outs:
            continue
        if not outs:
            if v not in C:
                return None
            continue
        if not ins:
            if v not in R:
                return None
            continue
        if v not in C:
            if len(ins) != 1:
                return None
            forced[v] = (ins[0], v)
        elif v not in R:
            branching.append(v)
    if _trees_from_glue(dag, forced) is None:
        return None
    steps = [0]

    def dfs(idx: int, glue: dict[int, Edge]):
        steps[0] += 1
        if steps[0] > limit:
            return None
        if _trees_from_glue(dag, glue) is None:
            return None
        if idx == len(branching):
            return dict(glue)
        v = branching[idx]
        for u in dag.pred[v]:
            glue[v] = (u, v)
            hit = dfs(idx + 1, glue)
            del glue[v]
            if hit is not None:
                return hit
        return None

    glue = dfs(0, dict(forced))
    if glue is None:
        return None
    return _cover_from_tree_edges(_trees_from_glue(dag, glue), Orientation.TREE)


def theorem2_check(ms: ModelSet) -> CoveringReport:
    """Generic identifiability from a tree cover or an anti-tree cover matching the signals.

    Both orientations are always searched so the report shows which of the
    two conditions holds. Failure of both is Unknown, since the condition is
    only sufficient.
    """
    if (ms.excited | ms.measured) != frozenset(ms.dag.vertices):
        return CoveringReport(Verdict.UNKNOWN, notes=["requires every vertex to be excited or measured"])
    tree = compatible_tree_cover(ms)
    dual = compatible_tree_cover(transpose_model(ms))
    anti = _flip(dual) if dual is not None else None
    verdict = Verdict.IDENTIFIABLE if tree is not None or anti is not None else Verdict.UNKNOWN
    return CoveringReport(verdict, tree, anti)


def cover_compatible(cover: TreeCover, ms: ModelSet) -> bool:
    """Roots/leaves signal rule for a given cover (excite roots and measure leaves of trees,
    the reverse for anti-trees)."""
    if cover.orientation is Orientation.TREE:
        return cover.roots <= ms.excited and cover.leaves <= ms.measured
    return cover.roots <= ms.measured and cover.leaves <= ms.excited


# ---------------------------------------------------------------------------
# allocation


@dataclass(frozen=True)
class AllocationResult:
    pattern: SignalPattern
    cover: TreeCover
    pruned: frozenset[int] = frozenset()

    @property
    def orientation(self) -> Orientation:
        return self.cover.orientation

    @property
    def signal_count(self) -> int:
        return self.pattern.K + self.pattern.N


def allocate_signals(dag: Dag, mode: Orientation | str = Orientation.TREE,
                     overrides: Mapping[int, str] | None = None,
                     exhaustive: bool = False) -> AllocationResult:
    """Excite roots and measure leaves of a tree cover (the reverse for anti-trees).

    Vertices that are internal to every tree they touch take the mode's
    default role (excite for trees, measure for anti-trees) unless
    ``overrides`` maps them to ``"excite"`` or ``"measure"``. Vertices without
    edges take the default role as well.
    """
    mode = Orientation(mode)
    overrides = dict(overrides or {})
    if mode is Orientation.TREE:
        cover = tree_cover(dag, exhaustive)
        excited, measured = set(cover.roots), set(cover.leaves)
        default = "excite"
    else:
        cover = anti_tree_cover(dag, exhaustive)
        excited, measured = set(cover.leaves), set(cover.roots)
        default = "measure"
    for v in dag.vertices:
        if v in excited or v in measured:
            if v in overrides and v not in cover.internal:
                raise ValueError(f"vertex {v} is a root or leaf; its role is fixed")
            continue
        role = overrides.get(v, default)
        if role not in ("excite", "measure"):
            raise ValueError(f"unknown role {role!r} for vertex {v}")
        (excited if role == "excite" else measured).add(v)
    return AllocationResult(SignalPattern(frozenset(excited), frozenset(measured)), cover)


def prune_redundant(ms: ModelSet | Dag, result: AllocationResult,
                    budget: Optional[int] = DEFAULT_BUDGET) -> AllocationResult:
    """Drop signals at roots that are both excited and measured when the vertex-wise
    check (its dual for anti-trees) still certifies the whole network.

    Roots are tried in ascending order; each accepted removal is kept for
    the later trials.
    """
    dag = ms if isinstance(ms, Dag) else ms.dag
    known = frozenset() if isinstance(ms, Dag) else ms.known
    R, C = set(result.pattern.excited), set(result.pattern.measured)
    pruned = set(result.pruned)
    for r in sorted(result.cover.roots & R & C):
        if result.orientation is Orientation.TREE:
            trial = ModelSet(dag, SignalPattern(frozenset(R - {r}), frozenset(C)), known)
            ok = theorem1_check(trial, budget).verdict is Verdict.IDENTIFIABLE
            if ok:
                R.discard(r)
        else:
            trial = ModelSet(dag, SignalPattern(frozenset(R), frozenset(C - {r})), known)
            ok = corollary3_check(trial, budget).verdict is Verdict.IDENTIFIABLE
            if ok:
                C.discard(r)
        if ok:
            pruned.add(r)
    return replace(result, pattern=SignalPattern(frozenset(R), frozenset(C)),
                   pruned=frozenset(pruned))
