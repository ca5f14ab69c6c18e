"""Directed acyclic graphs and the combinatorial primitives built on them.

Vertices are dense integers ``1..L``. An edge ``(i, j)`` means the module
``G_ji`` feeding the signal of ``i`` into ``j``.

Disjoint-path counts treat a vertex that lies in both the source set and
the target set as a zero-length path, consistent with ``T_vv = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .errors import CycleDetected, DuplicateEdge, GraphError, PathBudgetExceeded, SelfLoop

Edge = tuple[int, int]
Path = tuple[int, ...]

DEFAULT_PATH_CAP = 10**6


@dataclass(frozen=True)
class Dag:
    """Immutable simple DAG. Use :func:`build_dag` to construct a validated one."""

    vertex_count: int
    edges: frozenset[Edge] = field(default_factory=frozenset)

    @property
    def vertices(self) -> range:
        return range(1, self.vertex_count + 1)

    @cached_property
    def succ(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {v: [] for v in self.vertices}
        for i, j in self.edges:
            out[i].append(j)
        return {v: tuple(sorted(ns)) for v, ns in out.items()}

    @cached_property
    def pred(self) -> dict[int, tuple[int, ...]]:
        inn: dict[int, list[int]] = {v: [] for v in self.vertices}
        for i, j in self.edges:
            inn[j].append(i)
        return {v: tuple(sorted(ns)) for v, ns in inn.items()}

    def out_neighbors(self, v: int) -> frozenset[int]:
        return frozenset(self.succ[v])

    def in_neighbors(self, v: int) -> frozenset[int]:
        return frozenset(self.pred[v])

    @cached_property
    def topological_order(self) -> tuple[int, ...]:
        return tuple(v for layer in topo_layers(self) for v in sorted(layer))

    @cached_property
    def _desc_mask(self) -> dict[int, int]:
        # bit v set iff v reachable (length >= 0) from the key vertex
        masks: dict[int, int] = {}
        for v in reversed(self.topological_order):
            m = 1 << v
            for w in self.succ[v]:
                m |= masks[w]
            masks[v] = m
        return masks

    @cached_property
    def _anc_mask(self) -> dict[int, int]:
        masks: dict[int, int] = {}
        for v in self.topological_order:
            m = 1 << v
            for u in self.pred[v]:
                m |= masks[u]
            masks[v] = m
        return masks

    def reaches(self, i: int, j: int) -> bool:
        """True if there is a path of length >= 0 from i to j."""
        return bool(self._desc_mask[i] >> j & 1)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)


def build_dag(vertex_count: int, edge_list: Iterable[Edge]) -> Dag:
    """Validate an edge list and return a :class:`Dag`.

    Raises:
        GraphError: vertex count or endpoints out of range.
        SelfLoop, DuplicateEdge, CycleDetected: structural violations.
    """
    if vertex_count < 1:
        raise GraphError("a network needs at least one vertex")
    seen: set[Edge] = set()
    for edge in edge_list:
        i, j = int(edge[0]), int(edge[1])
        for v in (i, j):
            if not 1 <= v <= vertex_count:
                raise GraphError(f"vertex {v} outside 1..{vertex_count}")
        if i == j:
            raise SelfLoop(i)
        if (i, j) in seen:
            raise DuplicateEdge((i, j))
        seen.add((i, j))
    cycle = _find_cycle(vertex_count, seen)
    if cycle is not None:
        raise CycleDetected(cycle)
    return Dag(vertex_count, frozenset(seen))


def _find_cycle(n: int, edges: set[Edge]) -> list[int] | None:
    adj: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
    for i, j in sorted(edges):
        adj[i].append(j)
    color = dict.fromkeys(adj, 0)
    parent: dict[int, int] = {}
    for root in adj:
        if color[root]:
            continue
        stack = [(root, iter(adj[root]))]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            w = next(it, None)
            if w is None:
                color[v] = 2
                stack.pop()
            elif color[w] == 1:
                cycle = [w]
                u = v
                while u != w:
                    cycle.append(u)
                    u = parent[u]
                cycle.append(w)
                return cycle[::-1]
            elif color[w] == 0:
                parent[w] = v
                color[w] = 1
                stack.append((w, iter(adj[w])))
    return None


def transpose(dag: Dag) -> Dag:
    return Dag(dag.vertex_count, frozenset((j, i) for i, j in dag.edges))


def _mask_to_set(mask: int) -> frozenset[int]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return frozenset(out)


def reachable_set(dag: Dag, v: int) -> frozenset[int]:
    """Vertices reachable from ``v`` by a path of positive length (excludes ``v``)."""
    return _mask_to_set(dag._desc_mask[v] & ~(1 << v))


def ancestors(dag: Dag, v: int) -> frozenset[int]:
    return _mask_to_set(dag._anc_mask[v] & ~(1 << v))


def sources(dag: Dag) -> frozenset[int]:
    return frozenset(v for v in dag.vertices if not dag.pred[v])


def sinks(dag: Dag) -> frozenset[int]:
    return frozenset(v for v in dag.vertices if not dag.succ[v])


def topo_layers(dag: Dag) -> list[frozenset[int]]:
    """Longest-path layering: layer k holds vertices whose longest in-path has k-1 edges."""
    indeg = {v: len(dag.pred[v]) for v in dag.vertices}
    depth = dict.fromkeys(dag.vertices, 0)
    frontier = sorted(v for v, d in indeg.items() if d == 0)
    while frontier:
        nxt = []
        for v in frontier:
            for w in dag.succ[v]:
                depth[w] = max(depth[w], depth[v] + 1)
                indeg[w] -= 1
                if indeg[w] == 0:
                    nxt.append(w)
        frontier = sorted(nxt)
    layers: dict[int, set[int]] = {}
    for v, d in depth.items():
        layers.setdefault(d, set()).add(v)
    return [frozenset(layers[k]) for k in sorted(layers)]


# ---------------------------------------------------------------------------
# vertex-disjoint paths via unit-capacity max-flow on the split graph


class _FlowNet:
    __slots__ = ("head", "to", "cap")

    def __init__(self, n_nodes: int):
        self.head: list[list[int]] = [[] for _ in range(n_nodes)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add(self, u: int, v: int, cap: int = 1) -> None:
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(cap)
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)

    def augment(self, s: int, t: int) -> bool:
        prev_arc = [-1] * len(self.head)
        seen = [False] * len(self.head)
        seen[s] = True
        stack = [s]
        while stack:
            u = stack.pop()
            for a in self.head[u]:
                if self.cap[a] and not seen[self.to[a]]:
                    w = self.to[a]
                    seen[w] = True
                    prev_arc[w] = a
                    if w == t:
                        while w != s:
                            a = prev_arc[w]
                            self.cap[a] -= 1
                            self.cap[a ^ 1] += 1
                            w = self.to[a ^ 1]
                        return True
                    stack.append(w)
        return False

    def reachable(self, s: int) -> list[bool]:
        seen = [False] * len(self.head)
        seen[s] = True
        stack = [s]
        while stack:
            u = stack.pop()
            for a in self.head[u]:
                if self.cap[a] and not seen[self.to[a]]:
                    seen[self.to[a]] = True
                    stack.append(self.to[a])
        return seen


def _relevant_mask(dag: Dag, a: Iterable[int], b: Iterable[int], removed: int = 0) -> int:
    down = 0
    for v in a:
        down |= dag._desc_mask[v]
    up = 0
    for v in b:
        up |= dag._anc_mask[v]
    return down & up & ~removed


def _solve_flow(dag: Dag, a: frozenset[int], b: frozenset[int], removed: int = 0):
    # node 0 = super source, 1 = super sink, 2v = v_in, 2v+1 = v_out;
    # only the unit v_in -> v_out arcs can be cut
    net = _FlowNet(2 * dag.vertex_count + 2)
    big = dag.vertex_count + 1
    rel = _relevant_mask(dag, a, b, removed)
    for v in dag.vertices:
        if not rel >> v & 1:
            continue
        net.add(2 * v, 2 * v + 1)
        for w in dag.succ[v]:
            if rel >> w & 1:
                net.add(2 * v + 1, 2 * w, big)
    for v in sorted(a):
        if rel >> v & 1:
            net.add(0, 2 * v, big)
    for v in sorted(b):
        if rel >> v & 1:
            net.add(2 * v + 1, 1, big)
    value = 0
    while net.augment(0, 1):
        value += 1
    return value, net, rel


def _as_set(vs: Iterable[int]) -> frozenset[int]:
    return vs if isinstance(vs, frozenset) else frozenset(vs)


def disjoint_path_count(dag: Dag, a: Iterable[int], b: Iterable[int],
                        removed: Iterable[int] = ()) -> int:
    """Maximum number of vertex-disjoint paths from set ``a`` to set ``b``.

    ``removed`` vertices are deleted from the graph before counting.
    """
    rm = 0
    for v in removed:
        rm |= 1 << v
    return _solve_flow(dag, _as_set(a), _as_set(b), rm)[0]


def any_min_disconnecting_set(dag: Dag, a: Iterable[int], b: Iterable[int]) -> frozenset[int]:
    """Some minimum vertex cut from ``a`` to ``b``, read off the residual graph."""
    value, net, rel = _solve_flow(dag, _as_set(a), _as_set(b))
    seen = net.reachable(0)
    cut = frozenset(v for v in dag.vertices
                    if rel >> v & 1 and seen[2 * v] and not seen[2 * v + 1])
    assert len(cut) == value
    return cut


def min_disconnecting_set(dag: Dag, a: Iterable[int], b: Iterable[int]) -> frozenset[int]:
    """Lexicographically smallest minimum disconnecting set from ``a`` to ``b``.

    A vertex belongs to some minimum cut exactly when deleting it lowers the
    disjoint-path count by one, so the smallest such vertex is taken greedily
    and the search repeats on the reduced graph.
    """
    a, b = _as_set(a), _as_set(b)
    removed: list[int] = []
    rm = 0
    target = _solve_flow(dag, a, b)[0]
    candidates = sorted(_mask_to_set(_relevant_mask(dag, a, b)))
    for v in candidates:
        if target == 0:
            break
        if _solve_flow(dag, a, b, rm | 1 << v)[0] == target - 1:
            removed.append(v)
            rm |= 1 << v
            target -= 1
    return frozenset(removed)


def enumerate_paths(dag: Dag, i: int, j: int, cap: int = DEFAULT_PATH_CAP) -> list[Path]:
    """All directed paths from ``i`` to ``j`` in lexicographic order.

    ``i == j`` yields the single zero-length path ``(i,)``.

    Raises:
        PathBudgetExceeded: more than ``cap`` paths exist.
    """
    if cap <= 0:
        raise ValueError("cap must be positive")
    if not dag.reaches(i, j):
        return []
    paths: list[Path] = []
    anc_j = dag._anc_mask[j]
    stack: list[int] = [i]

    def walk(v: int) -> None:
        if v == j:
            if len(paths) >= cap:
                raise PathBudgetExceeded(i, j, cap)
            paths.append(tuple(stack))
            return
        for w in dag.succ[v]:
            if anc_j >> w & 1:
                stack.append(w)
                walk(w)
                stack.pop()

    walk(i)
    return paths


def path_edges(path: Path) -> list[Edge]:
    return list(zip(path, path[1:]))
