"""Network model sets: topology, signal pattern and per-module knowledge."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .graph import Dag, Edge, transpose
from .errors import GraphError


class EdgeStatus(enum.Enum):
    PARAMETERIZED = "parameterized"
    KNOWN = "known"


class Verdict(enum.Enum):
    """Three-valued outcome of a check.

    ``NOT_IDENTIFIABLE`` only comes from a necessary condition failing and
    ``IDENTIFIABLE`` only from a sufficient condition holding.
    """

    IDENTIFIABLE = "identifiable"
    UNKNOWN = "unknown"
    NOT_IDENTIFIABLE = "not_identifiable"

    @property
    def exit_code(self) -> int:
        return {"identifiable": 0, "unknown": 1, "not_identifiable": 2}[self.value]


def contradicts(a: Verdict, b: Verdict) -> bool:
    return {a, b} == {Verdict.IDENTIFIABLE, Verdict.NOT_IDENTIFIABLE}


@dataclass(frozen=True)
class SignalPattern:
    excited: frozenset[int] = frozenset()
    measured: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "excited", frozenset(self.excited))
        object.__setattr__(self, "measured", frozenset(self.measured))

    @property
    def K(self) -> int:
        return len(self.excited)

    @property
    def N(self) -> int:
        return len(self.measured)

    def swapped(self) -> "SignalPattern":
        return SignalPattern(self.measured, self.excited)


@dataclass(frozen=True)
class ModelSet:
    """A DAG, its excited/measured vertices and which modules are already known.

    ``known`` lists edges whose module is fixed; every other edge is
    parameterized independently.
    """

    dag: Dag
    signals: SignalPattern = field(default_factory=SignalPattern)
    known: frozenset[Edge] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "known", frozenset(self.known))
        for v in self.signals.excited | self.signals.measured:
            if not 1 <= v <= self.dag.vertex_count:
                raise GraphError(f"signal vertex {v} outside 1..{self.dag.vertex_count}")
        stray = self.known - self.dag.edges
        if stray:
            raise GraphError(f"known edges not in graph: {sorted(stray)}")

    @property
    def excited(self) -> frozenset[int]:
        return self.signals.excited

    @property
    def measured(self) -> frozenset[int]:
        return self.signals.measured

    @property
    def edge_status(self) -> Mapping[Edge, EdgeStatus]:
        return {e: EdgeStatus.KNOWN if e in self.known else EdgeStatus.PARAMETERIZED
                for e in self.dag.sorted_edges()}

    @property
    def parameterized_edges(self) -> list[Edge]:
        return [e for e in self.dag.sorted_edges() if e not in self.known]

    @property
    def full_cover(self) -> bool:
        return validate_full_cover(self)

    def with_signals(self, excited: Iterable[int] | None = None,
                     measured: Iterable[int] | None = None) -> "ModelSet":
        sig = SignalPattern(self.excited if excited is None else frozenset(excited),
                            self.measured if measured is None else frozenset(measured))
        return ModelSet(self.dag, sig, self.known)


def make_model(vertex_count: int, edges: Iterable[Edge], excited: Iterable[int] = (),
               measured: Iterable[int] = (), known: Iterable[Edge] = ()) -> ModelSet:
    from .graph import build_dag

    return ModelSet(build_dag(vertex_count, edges),
                    SignalPattern(frozenset(excited), frozenset(measured)), frozenset(known))


def transpose_model(ms: ModelSet) -> ModelSet:
    """Reverse every edge and swap the excited and measured sets."""
    return ModelSet(transpose(ms.dag), ms.signals.swapped(),
                    frozenset((j, i) for i, j in ms.known))


def validate_full_cover(ms: ModelSet) -> bool:
    """Whether every vertex is excited or measured."""
    return (ms.excited | ms.measured) == frozenset(ms.dag.vertices)
