import json

from netident.covering import tree_cover
from netident.export import EXCITATION_COLOR, MEASURED_FILL, PALETTE, roles, to_dot, to_json
from netident.fixtures import fixture_document, fixture_model
from netident.io import parse_json, parse_text
from netident.model import Verdict


def test_dot_marks_signals_cover_and_verdict():
    doc = fixture_document("rounds7")
    cover = tree_cover(fixture_model("rounds7").dag)
    dot = to_dot(doc, cover, Verdict.IDENTIFIABLE, {(1, 3): Verdict.IDENTIFIABLE})
    assert dot.startswith("digraph network {") and dot.rstrip().endswith("}")
    assert dot.count(f"[color={EXCITATION_COLOR}]") == len(doc.excited)
    assert dot.count(MEASURED_FILL) == len(doc.measured)
    assert PALETTE[0] in dot and 'label="verdict: identifiable"' in dot
    assert '"1" -> "3" [color=' in dot and 'label="ok"' in dot


def test_dot_dashes_known_edges_and_quotes_names():
    doc = parse_text('vertex a "b\nedge a "b\nknown a "b\nexcite a\nmeasure "b\n')
    dot = to_dot(doc)
    assert "style=dashed" in dot and '"\\"b"' in dot


def test_dot_is_stable():
    doc = fixture_document("witness6")
    assert to_dot(doc) == to_dot(doc)


def test_json_export_parses_back():
    doc = fixture_document("witness6")
    text = to_json(doc, tree_cover(fixture_model("witness6").dag), Verdict.IDENTIFIABLE)
    raw = json.loads(text)
    assert raw["annotations"]["verdict"] == "identifiable"
    assert raw["annotations"]["roles"]["4"] == "both"
    assert raw["annotations"]["roles"]["3"] == "measured"
    back = parse_json(text)
    assert back.edges == doc.edges and back.cover is not None
    assert roles(doc)["1"] == "excited"
