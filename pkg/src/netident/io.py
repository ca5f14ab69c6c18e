"""Network documents: a line-oriented text format and an equivalent JSON form.

Text format, one directive per line, ``#`` starts a comment::

    vertices 7          # declares vertices named 1..7
    vertex a b c        # declares named vertices
    edge a b            # module from a into b
    excite a b
    measure c
    known a b           # module on edge a -> b is fixed
    order 1 1           # numerator / denominator order of sampled modules
    order a b 2 1       # per-edge override

Vertex ids follow declaration order, so ``vertices N`` gives ids equal to
the names.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .covering import Orientation, Tree, TreeCover
from .errors import ParseError
from .graph import build_dag
from .model import ModelSet, SignalPattern

DOCUMENT_FORMAT = "netident/1"


@dataclass
class NetworkDocument:
    """Name-level description of a network model set."""

    names: list[str] = field(default_factory=list)
    edges: list[tuple[str, str]] = field(default_factory=list)
    excited: list[str] = field(default_factory=list)
    measured: list[str] = field(default_factory=list)
    known: list[tuple[str, str]] = field(default_factory=list)
    orders: Optional[tuple[int, int]] = None
    edge_orders: dict[tuple[str, str], tuple[int, int]] = field(default_factory=dict)
    cover: Optional[dict] = None

    def index(self) -> dict[str, int]:
        return {n: k + 1 for k, n in enumerate(self.names)}

    def to_model(self) -> ModelSet:
        """Build the model set; raises GraphError for structural problems."""
        ix = self.index()
        dag = build_dag(len(self.names), [(ix[a], ix[b]) for a, b in self.edges])
        return ModelSet(dag, SignalPattern(frozenset(ix[n] for n in self.excited),
                                           frozenset(ix[n] for n in self.measured)),
                        frozenset((ix[a], ix[b]) for a, b in self.known))

    def model_orders(self):
        """Orders in the form accepted by the instance sampler."""
        base = self.orders or (1, 1)
        if not self.edge_orders:
            return base
        ix = self.index()
        out = {(ix[a], ix[b]): base for a, b in self.edges}
        out.update({(ix[a], ix[b]): o for (a, b), o in self.edge_orders.items()})
        return out

    def name_of(self, v: int) -> str:
        return self.names[v - 1]

    def tree_cover(self) -> Optional[TreeCover]:
        if not self.cover:
            return None
        ix = self.index()
        orient = Orientation(self.cover["orientation"])
        trees = tuple(Tree(ix[t["root"]], frozenset((ix[a], ix[b]) for a, b in t["edges"]), orient)
                      for t in self.cover["trees"])
        return TreeCover(trees, orient)

    def with_signals(self, pattern: SignalPattern, cover: TreeCover | None = None) -> "NetworkDocument":
        doc = NetworkDocument(list(self.names), list(self.edges),
                              [self.name_of(v) for v in sorted(pattern.excited)],
                              [self.name_of(v) for v in sorted(pattern.measured)],
                              list(self.known), self.orders, dict(self.edge_orders), self.cover)
        if cover is not None:
            doc.cover = cover_to_dict(cover, self.name_of)
        return doc


def cover_to_dict(cover: TreeCover, name=str) -> dict:
    return {"orientation": cover.orientation.value,
            "trees": [{"root": name(t.root),
                       "edges": [[name(a), name(b)] for a, b in sorted(t.edges)]}
                      for t in cover.trees]}


def document_from_model(ms: ModelSet, names: list[str] | None = None) -> NetworkDocument:
    names = names or [str(v) for v in ms.dag.vertices]
    n = lambda v: names[v - 1]
    return NetworkDocument(list(names), [(n(a), n(b)) for a, b in ms.dag.sorted_edges()],
                           [n(v) for v in sorted(ms.excited)], [n(v) for v in sorted(ms.measured)],
                           [(n(a), n(b)) for a, b in sorted(ms.known)])


# ---------------------------------------------------------------------------
# text format


def _tokens(line: str) -> list[tuple[str, int]]:
    body = line.split("#", 1)[0]
    out, k = [], 0
    while k < len(body):
        if body[k].isspace():
            k += 1
            continue
        start = k
        while k < len(body) and not body[k].isspace():
            k += 1
        out.append((body[start:k], start + 1))
    return out


def _int(tok: tuple[str, int], lineno: int) -> int:
    try:
        value = int(tok[0])
    except ValueError:
        raise ParseError(f"expected an integer, got {tok[0]!r}", lineno, tok[1]) from None
    if value < 0:
        raise ParseError("orders must be non-negative", lineno, tok[1])
    return value


def parse_text(text: str) -> NetworkDocument:
    doc = NetworkDocument()
    declared: set[str] = set()

    def ref(tok, lineno):
        if tok[0] not in declared:
            raise ParseError(f"undeclared vertex {tok[0]!r}", lineno, tok[1])
        return tok[0]

    def declare(name, lineno, col):
        if name in declared:
            raise ParseError(f"vertex {name!r} declared twice", lineno, col)
        declared.add(name)
        doc.names.append(name)

    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = _tokens(line)
        if not toks:
            continue
        (word, col), args = toks[0], toks[1:]
        if word == "vertices":
            if len(args) != 1:
                raise ParseError("'vertices' takes one count", lineno, col)
            for k in range(1, _int(args[0], lineno) + 1):
                declare(str(k), lineno, args[0][1])
        elif word == "vertex":
            if not args:
                raise ParseError("'vertex' needs at least one name", lineno, col)
            for name, c in args:
                declare(name, lineno, c)
        elif word in ("edge", "known"):
            if len(args) != 2:
                raise ParseError(f"'{word}' takes two vertices", lineno, col)
            pair = (ref(args[0], lineno), ref(args[1], lineno))
            if word == "edge":
                doc.edges.append(pair)
            else:
                doc.known.append(pair)
        elif word in ("excite", "measure"):
            if not args:
                raise ParseError(f"'{word}' needs at least one vertex", lineno, col)
            target = doc.excited if word == "excite" else doc.measured
            for tok in args:
                name = ref(tok, lineno)
                if name not in target:
                    target.append(name)
        elif word == "order":
            if len(args) == 2:
                doc.orders = (_int(args[0], lineno), _int(args[1], lineno))
            elif len(args) == 4:
                pair = (ref(args[0], lineno), ref(args[1], lineno))
                doc.edge_orders[pair] = (_int(args[2], lineno), _int(args[3], lineno))
            else:
                raise ParseError("'order' takes 'm n' or 'a b m n'", lineno, col)
        else:
            raise ParseError(f"unknown directive {word!r}", lineno, col)
    edge_set = set(doc.edges)
    for pair in list(doc.known) + list(doc.edge_orders):
        if pair not in edge_set:
            raise ParseError(f"edge {pair[0]} -> {pair[1]} is not declared")
    return doc


def dumps_text(doc: NetworkDocument) -> str:
    lines = []
    if doc.names == [str(k) for k in range(1, len(doc.names) + 1)]:
        lines.append(f"vertices {len(doc.names)}")
    else:
        lines.append("vertex " + " ".join(doc.names))
    lines += [f"edge {a} {b}" for a, b in doc.edges]
    if doc.excited:
        lines.append("excite " + " ".join(doc.excited))
    if doc.measured:
        lines.append("measure " + " ".join(doc.measured))
    lines += [f"known {a} {b}" for a, b in doc.known]
    if doc.orders:
        lines.append(f"order {doc.orders[0]} {doc.orders[1]}")
    lines += [f"order {a} {b} {m} {n}" for (a, b), (m, n) in doc.edge_orders.items()]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON format


def document_to_dict(doc: NetworkDocument) -> dict:
    out = {"format": DOCUMENT_FORMAT, "vertices": list(doc.names),
           "edges": [list(e) for e in doc.edges], "excited": list(doc.excited),
           "measured": list(doc.measured), "known": [list(e) for e in doc.known]}
    if doc.orders is not None or doc.edge_orders:
        out["orders"] = {"default": list(doc.orders) if doc.orders else None,
                         "edges": [[a, b, m, n] for (a, b), (m, n) in doc.edge_orders.items()]}
    if doc.cover is not None:
        out["cover"] = doc.cover
    return out


def _names(value, what: str) -> list[str]:
    if not isinstance(value, list):
        raise ParseError(f"'{what}' must be a list")
    return [str(v) for v in value]


def _pairs(value, what: str) -> list[tuple[str, str]]:
    if not isinstance(value, list) or any(not isinstance(p, list) or len(p) != 2 for p in value):
        raise ParseError(f"'{what}' must be a list of [from, to] pairs")
    return [(str(a), str(b)) for a, b in value]


def document_from_dict(raw: Mapping) -> NetworkDocument:
    if not isinstance(raw, Mapping):
        raise ParseError("top level must be an object")
    if raw.get("format") != DOCUMENT_FORMAT:
        raise ParseError(f"unsupported format {raw.get('format')!r}")
    doc = NetworkDocument(_names(raw.get("vertices", []), "vertices"),
                          _pairs(raw.get("edges", []), "edges"),
                          _names(raw.get("excited", []), "excited"),
                          _names(raw.get("measured", []), "measured"),
                          _pairs(raw.get("known", []), "known"))
    if len(set(doc.names)) != len(doc.names):
        raise ParseError("vertex names must be unique")
    declared = set(doc.names)
    for n in [v for e in doc.edges + doc.known for v in e] + doc.excited + doc.measured:
        if n not in declared:
            raise ParseError(f"undeclared vertex {n!r}")
    orders = raw.get("orders")
    if orders:
        if orders.get("default") is not None:
            doc.orders = tuple(int(x) for x in orders["default"])
        for a, b, m, n in orders.get("edges", []):
            doc.edge_orders[(str(a), str(b))] = (int(m), int(n))
    if raw.get("cover") is not None:
        cover = raw["cover"]
        try:
            Orientation(cover["orientation"])
            for t in cover["trees"]:
                if t["root"] not in declared:
                    raise ParseError(f"undeclared cover root {t['root']!r}")
                _pairs(t["edges"], "cover edges")
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed cover: {exc}") from None
        doc.cover = cover
    return doc


def parse_json(text: str) -> NetworkDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return document_from_dict(raw)


def dumps_json(doc: NetworkDocument) -> str:
    return json.dumps(document_to_dict(doc), indent=2) + "\n"


def parse_document(text: str) -> NetworkDocument:
    """Parse either format, choosing JSON when the text starts with ``{``."""
    if text.lstrip().startswith("{"):
        return parse_json(text)
    return parse_text(text)


def load_document(path: str | Path) -> NetworkDocument:
    return parse_document(Path(path).read_text())
