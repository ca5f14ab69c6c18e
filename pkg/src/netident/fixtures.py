"""Bundled example networks used by the tests, the CLI and the README."""

from __future__ import annotations

from importlib import resources

from .io import NetworkDocument, parse_text
from .model import ModelSet, make_model

FIXTURES = ("trees7", "antitrees7", "rounds7", "rounds7_partial", "witness6", "alloc20")

# The 20-vertex allocation example measures internal vertex 19 instead of
# exciting it.
ALLOC20_OVERRIDES = {19: "measure"}


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    return resources.files("netident.data").joinpath(f"{name}.net").read_text()


def fixture_document(name: str) -> NetworkDocument:
    return parse_text(fixture_text(name))


def fixture_model(name: str) -> ModelSet:
    return fixture_document(name).to_model()


def chain(n: int = 3, excited=(1,), measured=None) -> ModelSet:
    """Path 1 -> 2 -> ... -> n, measuring the end by default."""
    return make_model(n, [(k, k + 1) for k in range(1, n)], excited,
                      (n,) if measured is None else measured)


def diamond(excited=(1,), measured=(4,)) -> ModelSet:
    return make_model(4, [(1, 2), (1, 3), (2, 4), (3, 4)], excited, measured)


def star(leaves: int = 3, excited=(1,), measured=None) -> ModelSet:
    """Vertex 1 feeding ``leaves`` sinks."""
    ends = range(2, leaves + 2)
    return make_model(leaves + 1, [(1, v) for v in ends], excited,
                      tuple(ends) if measured is None else measured)
