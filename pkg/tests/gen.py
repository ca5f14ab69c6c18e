"""Seeded random generators shared by the property and acceptance suites."""

from __future__ import annotations

import numpy as np

from netident.model import ModelSet, make_model


def random_dag_edges(rng: np.random.Generator, n: int, p: float) -> list[tuple[int, int]]:
    """Edges of a random DAG on 1..n: a hidden random order, each forward pair kept with probability p."""
    order = rng.permutation(n) + 1
    return [(int(order[a]), int(order[b])) for a in range(n) for b in range(a + 1, n)
            if rng.random() < p]


def random_subset(rng: np.random.Generator, n: int, p: float, nonempty: bool = True) -> list[int]:
    out = [v for v in range(1, n + 1) if rng.random() < p]
    if nonempty and not out:
        out = [int(rng.integers(1, n + 1))]
    return out


def random_model(rng: np.random.Generator, max_vertices: int = 10, p_edge=(0.15, 0.5),
                 p_signal: float = 0.5) -> ModelSet:
    n = int(rng.integers(2, max_vertices + 1))
    edges = random_dag_edges(rng, n, rng.uniform(*p_edge))
    return make_model(n, edges, random_subset(rng, n, p_signal), random_subset(rng, n, p_signal))


def random_tree_edges(rng: np.random.Generator, n: int) -> list[tuple[int, int]]:
    """Random out-tree rooted at 1: every later vertex picks an earlier parent."""
    return [(int(rng.integers(1, v)), v) for v in range(2, n + 1)]


def dag_strategy(max_vertices: int = 7):
    """Hypothesis strategy for (vertex count, edge list) of a small DAG."""
    from hypothesis import strategies as st

    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_vertices))
        order = draw(st.permutations(list(range(1, n + 1))))
        pairs = [(order[a], order[b]) for a in range(n) for b in range(a + 1, n)]
        keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
        return n, [p for p, k in zip(pairs, keep) if k]

    return build()


def subset_strategy(n: int):
    from hypothesis import strategies as st

    return st.frozensets(st.integers(1, n))
