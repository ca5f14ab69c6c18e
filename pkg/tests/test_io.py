import json

import pytest
from hypothesis import given, settings

from gen import dag_strategy
from netident.covering import tree_cover
from netident.errors import CycleDetected, ParseError
from netident.fixtures import FIXTURES, fixture_document, fixture_model, fixture_text
from netident.io import (document_from_model, dumps_json, dumps_text, load_document,
                         parse_document, parse_json, parse_text)
from netident.model import make_model

SAMPLE = """
# comment line
vertex a b c
edge a b      # trailing comment
edge b c
excite a
measure b c
known b c
order 2 1
order a b 0 0
"""


def test_parse_text_directives():
    doc = parse_text(SAMPLE)
    assert doc.names == ["a", "b", "c"]
    assert doc.edges == [("a", "b"), ("b", "c")]
    assert doc.excited == ["a"] and doc.measured == ["b", "c"]
    assert doc.known == [("b", "c")]
    assert doc.orders == (2, 1) and doc.edge_orders == {("a", "b"): (0, 0)}
    ms = doc.to_model()
    assert ms.dag.edges == {(1, 2), (2, 3)} and ms.known == {(2, 3)}
    assert doc.model_orders() == {(1, 2): (0, 0), (2, 3): (2, 1)}


@pytest.mark.parametrize("text, line, col", [
    ("vertices 2\nedge 1 3\n", 2, 8),
    ("vertices 2\nfrobnicate 1\n", 2, 1),
    ("vertex a a\n", 1, 10),
    ("vertices x\n", 1, 10),
    ("vertices 2\norder 1\n", 2, 1),
    ("vertices 2\nedge 1\n", 2, 1),
])
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(ParseError) as exc:
        parse_text(text)
    assert (exc.value.line, exc.value.column) == (line, col)


def test_known_edge_must_exist():
    with pytest.raises(ParseError):
        parse_text("vertices 2\nknown 1 2\n")


def test_cycles_surface_at_model_build():
    doc = parse_text("vertices 2\nedge 1 2\nedge 2 1\n")
    with pytest.raises(CycleDetected):
        doc.to_model()


def test_json_round_trip_and_errors():
    doc = parse_text(SAMPLE)
    again = parse_json(dumps_json(doc))
    assert again == doc
    with pytest.raises(ParseError) as exc:
        parse_json('{"format": "netident/1",\n "vertices": [1,}')
    assert exc.value.line == 2
    with pytest.raises(ParseError):
        parse_json('{"format": "other/9"}')
    with pytest.raises(ParseError):
        parse_json('{"format": "netident/1", "vertices": ["a"], "edges": [["a", "b"]]}')
    extra = json.loads(dumps_json(doc))
    extra["annotations"] = {"anything": 1}
    assert parse_json(json.dumps(extra)) == doc


def test_cover_round_trip():
    ms = fixture_model("rounds7")
    doc = fixture_document("rounds7").with_signals(ms.signals, tree_cover(ms.dag))
    restored = parse_document(dumps_json(doc)).tree_cover()
    assert restored == tree_cover(ms.dag)


def test_fixtures_load():
    sizes = {name: (len(fixture_document(name).names), len(fixture_document(name).edges))
             for name in FIXTURES}
    assert sizes == {"trees7": (7, 7), "antitrees7": (7, 7), "rounds7": (7, 8), "rounds7_partial": (7, 8),
                     "witness6": (6, 6), "alloc20": (20, 48)}
    with pytest.raises(KeyError):
        fixture_text("nope")


def test_load_document_from_file(tmp_path):
    path = tmp_path / "net.json"
    path.write_text(dumps_json(fixture_document("witness6")))
    assert load_document(path) == fixture_document("witness6")


@settings(max_examples=80, deadline=None)
@given(dag_strategy(8))
def test_text_and_json_round_trip(g):
    n, edges = g
    ms = make_model(n, edges, excited=[1], measured=[n])
    doc = document_from_model(ms)
    assert parse_text(dumps_text(doc)) == doc
    assert parse_json(dumps_json(doc)) == doc
    assert parse_document(dumps_text(doc)).to_model() == ms
