"""Identifiability decision procedures for acyclic networks.

Every procedure here is one-sided. The necessary check can only reject,
the path-based and vertex-wise checks can only accept. Anything they cannot
settle is reported as ``Verdict.UNKNOWN``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .errors import BudgetExhausted, PathBudgetExceeded
from .graph import (DEFAULT_PATH_CAP, Dag, Edge, Path, disjoint_path_count,
                    enumerate_paths, min_disconnecting_set, path_edges)
from .model import ModelSet, Verdict, transpose_model, validate_full_cover

DEFAULT_BUDGET = 20_000


# ---------------------------------------------------------------------------
# necessary condition


@dataclass(frozen=True)
class VertexCondition:
    vertex: int
    in_paths: int
    in_required: int
    out_paths: int
    out_required: int

    @property
    def ok(self) -> bool:
        return self.in_paths == self.in_required and self.out_paths == self.out_required


@dataclass
class NecessaryReport:
    verdict: Verdict
    vertices: list[VertexCondition]
    failing: list[int] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def necessary_check(ms: ModelSet) -> NecessaryReport:
    """Check excitation reach into every in-neighbourhood and out-neighbourhood reach into
    the measurements, using generic rank = number of vertex-disjoint paths.

    Only parameterized edges define the neighbourhoods. With any known
    module present a failure is reported but the verdict stays UNKNOWN,
    since the underlying implication assumes a fully parameterized set.
    """
    dag = ms.dag
    params = set(ms.parameterized_edges)
    rows = []
    for j in dag.vertices:
        n_in = frozenset(i for i in dag.pred[j] if (i, j) in params)
        n_out = frozenset(k for k in dag.succ[j] if (j, k) in params)
        rows.append(VertexCondition(
            j,
            disjoint_path_count(dag, ms.excited, n_in) if n_in else 0, len(n_in),
            disjoint_path_count(dag, n_out, ms.measured) if n_out else 0, len(n_out),
        ))
    failing = [r.vertex for r in rows if not r.ok]
    notes = []
    if not failing:
        verdict = Verdict.UNKNOWN
    elif ms.known:
        verdict = Verdict.UNKNOWN
        notes.append("necessary condition fails but known modules are present; not conclusive")
    else:
        verdict = Verdict.NOT_IDENTIFIABLE
    return NecessaryReport(verdict, rows, failing, notes)


# ---------------------------------------------------------------------------
# iterative unique-path check


@dataclass(frozen=True)
class EdgeReport:
    edge: Edge
    verdict: Verdict
    round: Optional[int] = None
    pair: Optional[tuple[int, int]] = None
    unknown_paths: tuple[Path, ...] = ()
    known_a_priori: bool = False


@dataclass
class IterativeReport:
    verdict: Verdict
    edges: dict[Edge, EdgeReport]
    rounds: int
    notes: list[str] = field(default_factory=list)

    def decided_in(self, k: int) -> set[Edge]:
        return {e for e, r in self.edges.items() if r.round == k}


def iterative_path_check(ms: ModelSet, cap: int = DEFAULT_PATH_CAP) -> IterativeReport:
    """Mark a module identifiable when its edge lies on every still-unknown path
    between some excited vertex and some measured vertex; repeat to a fixed point."""
    dag = ms.dag
    reports: dict[Edge, EdgeReport] = {
        e: EdgeReport(e, Verdict.IDENTIFIABLE, known_a_priori=True) for e in ms.known}
    notes: list[str] = []
    if not validate_full_cover(ms):
        notes.append("requires every vertex to be excited or measured; nothing decided")
        for e in ms.parameterized_edges:
            reports[e] = EdgeReport(e, Verdict.UNKNOWN)
        return IterativeReport(Verdict.UNKNOWN if ms.parameterized_edges else Verdict.IDENTIFIABLE,
                               dict(sorted(reports.items())), 0, notes)

    pair_paths: dict[tuple[int, int], list[tuple[Path, frozenset[Edge]]]] = {}
    for i in sorted(ms.excited):
        for j in sorted(ms.measured):
            if i == j or not dag.reaches(i, j):
                continue
            try:
                paths = enumerate_paths(dag, i, j, cap)
            except PathBudgetExceeded:
                notes.append(f"path budget exceeded for pair ({i}, {j}); pair skipped")
                continue
            pair_paths[(i, j)] = [(p, frozenset(path_edges(p))) for p in paths]

    known = set(ms.known)
    k = 0
    while True:
        k += 1
        new: dict[Edge, EdgeReport] = {}
        for pair, paths in pair_paths.items():
            unknown = [(p, es) for p, es in paths if not es <= known]
            if not unknown:
                continue
            common = frozenset.intersection(*(es for _, es in unknown))
            for e in sorted(common - known):
                if e not in new:
                    new[e] = EdgeReport(e, Verdict.IDENTIFIABLE, k, pair,
                                        tuple(p for p, _ in unknown))
        if not new:
            break
        reports.update(new)
        known |= set(new)

    for e in ms.parameterized_edges:
        reports.setdefault(e, EdgeReport(e, Verdict.UNKNOWN))
    done = all(r.verdict is Verdict.IDENTIFIABLE for r in reports.values())
    rounds = max((r.round for r in reports.values() if r.round), default=0)
    return IterativeReport(Verdict.IDENTIFIABLE if done else Verdict.UNKNOWN,
                           dict(sorted(reports.items())), rounds, notes)


# ---------------------------------------------------------------------------
# vertex-wise sufficient condition


@dataclass(frozen=True)
class WitnessSets:
    """Evidence for one unmeasured (resp. unexcited, when ``dual``) vertex.

    For a primal witness ``measured_set``/``excited_set`` are the sets
    C_j/R_j with ``vertex`` in R_j; ``siblings`` is S_j and ``hidden`` the
    unexcited in-neighbours. A dual witness is stated on the original graph:
    ``vertex`` lies in ``measured_set``, ``hidden`` are unmeasured
    out-neighbours and ``siblings`` collects them with the in-neighbours of
    every out-neighbour.
    """

    vertex: int
    measured_set: frozenset[int]
    excited_set: frozenset[int]
    siblings: frozenset[int]
    hidden: frozenset[int]
    cut: frozenset[int] = frozenset()
    dual: bool = False


@dataclass
class VertexwiseReport:
    verdict: Verdict
    witnesses: dict[int, WitnessSets]
    measured_ok: dict[int, bool]
    failing: list[int] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    dual: bool = False


def sibling_set(dag: Dag, j: int, excited: frozenset[int]) -> tuple[frozenset[int], frozenset[int]]:
    """Return (unexcited in-neighbours of j, S_j)."""
    hidden = frozenset(i for i in dag.pred[j] if i not in excited)
    s = set(hidden)
    for i in dag.pred[j]:
        s.update(dag.succ[i])
    return hidden, frozenset(s)


class _RankOracle:
    """Memoised disjoint-path counts into a fixed target set, with an evaluation budget."""

    def __init__(self, dag: Dag, targets: frozenset[int], counter: list[int], budget):
        self.dag, self.targets = dag, targets
        self.counter, self.budget = counter, budget
        self.cache: dict[frozenset[int], int] = {}

    def __call__(self, xs) -> int:
        key = frozenset(xs)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if self.budget is not None and self.counter[0] >= self.budget:
            raise BudgetExhausted
        self.counter[0] += 1
        val = disjoint_path_count(self.dag, key, self.targets) if key else 0
        self.cache[key] = val
        return val


def witness_conditions(dag: Dag, w: WitnessSets) -> tuple[int, int]:
    """Return (b_{R_j -> C_j}, b_{(R_j u S_j) minus j -> C_j}) for a primal witness."""
    first = disjoint_path_count(dag, w.excited_set, w.measured_set)
    second = disjoint_path_count(dag, (w.excited_set | w.siblings) - {w.vertex}, w.measured_set)
    return first, second


def _target_candidates(dag: Dag, j: int, hidden: frozenset[int], pool: list[int]):
    """Candidate measured sets, smallest first, each containing ``hidden`` and
    at least one measured vertex reachable from ``j``."""
    if not any(dag.reaches(j, c) for c in pool):
        return
    rest = [c for c in pool if c not in hidden]
    full = frozenset(hidden) | frozenset(rest)
    seen = set()
    for size in range(0, len(rest) + 1):
        for extra in itertools.combinations(rest, size):
            cand = hidden | frozenset(extra)
            if not any(dag.reaches(j, c) for c in cand):
                continue
            if cand not in seen:
                seen.add(cand)
                yield cand
        if size == 1 and full not in seen:
            seen.add(full)
            yield full


def find_witness(ms: ModelSet, j: int, budget: Optional[int] = DEFAULT_BUDGET) -> Optional[WitnessSets]:
    """Search sets (C_j, R_j) satisfying the two disjoint-path equalities for vertex ``j``.

    The search runs over measured target sets C_j (smallest first) and, for
    each, over excited sets A = R_j minus j for which A + j is linked into C_j,
    looking for one whose linkage already absorbs every vertex of S_j minus j.
    ``budget=None`` makes it exhaustive.

    Raises:
        BudgetExhausted: more than ``budget`` flow evaluations were needed.
    """
    dag = ms.dag
    R, C = ms.excited, ms.measured
    hidden, S = sibling_set(dag, j, R)
    if not hidden <= C:
        return None
    Y = S - {j}
    # measured vertices some relevant set can reach
    starts = (R - {j}) | Y | {j}
    pool = sorted(c for c in C if c != j and any(dag.reaches(s, c) for s in starts))
    counter = [0]
    for cj in _target_candidates(dag, j, hidden, pool):
        rank = _RankOracle(dag, cj, counter, budget)
        if rank({j}) != 1:
            continue
        ry = rank(Y)
        if rank(Y | {j}) == ry:
            continue
        found = _search_excited(dag, j, Y, R, cj, rank, ry)
        if found is not None:
            rj = found | {j}
            cut = min_disconnecting_set(dag, (rj | S) - {j}, cj)
            return WitnessSets(j, cj, frozenset(rj), S, hidden, cut)
    return None


def _search_excited(dag: Dag, j: int, Y: frozenset[int], R: frozenset[int],
                    cj: frozenset[int], rank: _RankOracle, ry: int) -> Optional[frozenset[int]]:
    pool = [p for p in sorted(R - {j}) if any(dag.reaches(p, c) for c in cj)]
    # candidates already inside the closure of Y first: they never push j into the span
    inside = [p for p in pool if rank(Y | {p}) == ry]
    order = inside + [p for p in pool if p not in inside]
    limit = rank(frozenset(order) | {j}) - 1

    def dfs(a: frozenset[int], start: int) -> Optional[frozenset[int]]:
        if len(a) >= ry and rank(a | Y) == len(a):
            return a
        if len(a) >= limit:
            return None
        rest = frozenset(order[start:])
        if rank(a | rest | Y) != rank(a | rest):
            return None
        for idx in range(start, len(order)):
            p = order[idx]
            nxt = a | {p}
            if rank(nxt | {j}) == len(nxt) + 1:
                hit = dfs(nxt, idx + 1)
                if hit is not None:
                    return hit
        return None

    return dfs(frozenset(), 0)


def theorem1_check(ms: ModelSet, budget: Optional[int] = DEFAULT_BUDGET) -> VertexwiseReport:
    """Vertex-wise sufficient check for generic identifiability.

    Measured vertices need as many disjoint paths from the excitations as
    they have in-neighbours; every other vertex needs witness sets found by
    :func:`find_witness`. A failed or exhausted search yields UNKNOWN.
    """
    dag = ms.dag
    notes: list[str] = []
    if not validate_full_cover(ms):
        return VertexwiseReport(Verdict.UNKNOWN, {}, {}, [],
                                ["requires every vertex to be excited or measured"])
    measured_ok = {}
    failing = []
    for j in sorted(ms.measured):
        n_in = dag.in_neighbors(j)
        ok = not n_in or disjoint_path_count(dag, ms.excited, n_in) == len(n_in)
        measured_ok[j] = ok
        if not ok:
            failing.append(j)
    witnesses: dict[int, WitnessSets] = {}
    for j in sorted(ms.excited - ms.measured):
        try:
            w = find_witness(ms, j, budget)
        except BudgetExhausted:
            notes.append(f"witness search budget exhausted at vertex {j}")
            w = None
        if w is None and not dag.pred[j]:
            # no in-edges means no modules to recover at j
            notes.append(f"vertex {j} has no in-neighbours; nothing to identify")
        elif w is None:
            failing.append(j)
        else:
            witnesses[j] = w
    verdict = Verdict.UNKNOWN if failing else Verdict.IDENTIFIABLE
    return VertexwiseReport(verdict, witnesses, measured_ok, sorted(failing), notes)


def corollary3_check(ms: ModelSet, budget: Optional[int] = DEFAULT_BUDGET) -> VertexwiseReport:
    """Dual vertex-wise check: the primal check on the transpose network."""
    rep = theorem1_check(transpose_model(ms), budget)
    witnesses = {
        v: WitnessSets(v, measured_set=w.excited_set, excited_set=w.measured_set,
                       siblings=w.siblings, hidden=w.hidden, cut=w.cut, dual=True)
        for v, w in rep.witnesses.items()
    }
    return VertexwiseReport(rep.verdict, witnesses, rep.measured_ok, rep.failing,
                            rep.notes, dual=True)


def prop4_consistency(ms: ModelSet, j: int, witness: WitnessSets) -> bool:
    """Whether the excitations reach the in-neighbours of ``j`` by disjoint paths."""
    n_in = ms.dag.in_neighbors(j)
    if not n_in:
        return True
    return disjoint_path_count(ms.dag, ms.excited, n_in) == len(n_in)
