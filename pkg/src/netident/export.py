"""Annotated graph exports: Graphviz DOT and JSON."""

from __future__ import annotations

import json
from typing import Mapping, Optional

from .covering import TreeCover
from .io import NetworkDocument, document_to_dict
from .model import Verdict

# fixed palette so exports are bit-stable
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22")
EXCITATION_COLOR = "red"
MEASURED_FILL = "palegreen"


def _q(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def roles(doc: NetworkDocument) -> dict[str, str]:
    ex, me = set(doc.excited), set(doc.measured)
    out = {}
    for n in doc.names:
        out[n] = ("both" if n in ex and n in me else "excited" if n in ex
                  else "measured" if n in me else "none")
    return out


def to_dot(doc: NetworkDocument, cover: Optional[TreeCover] = None,
           verdict: Optional[Verdict] = None,
           edge_verdicts: Optional[Mapping[tuple[int, int], Verdict]] = None) -> str:
    """DOT text: red arrows into excited vertices, filled measured vertices,
    one color per tree of ``cover`` and optional verdict labels."""
    cover = cover if cover is not None else doc.tree_cover()
    ix = doc.index()
    color_of = {}
    if cover is not None:
        for k, t in enumerate(cover.trees):
            for e in t.edges:
                color_of[e] = PALETTE[k % len(PALETTE)]
    lines = ["digraph network {", "  rankdir=LR;", "  node [shape=circle];"]
    if verdict is not None:
        lines.append(f'  label="verdict: {verdict.value}";')
        lines.append("  labelloc=t;")
    measured = set(doc.measured)
    for n in doc.names:
        attrs = f' [style=filled, fillcolor="{MEASURED_FILL}"]' if n in measured else ""
        lines.append(f"  {_q(n)}{attrs};")
    for n in doc.excited:
        marker = _q(f"r_{n}")
        lines.append(f'  {marker} [shape=point, width=0.05, color={EXCITATION_COLOR}];')
        lines.append(f"  {marker} -> {_q(n)} [color={EXCITATION_COLOR}];")
    for a, b in doc.edges:
        e = (ix[a], ix[b])
        attrs = []
        if e in color_of:
            attrs.append(f'color="{color_of[e]}"')
        if (a, b) in set(doc.known):
            attrs.append("style=dashed")
        if edge_verdicts and e in edge_verdicts:
            mark = "ok" if edge_verdicts[e] is Verdict.IDENTIFIABLE else "?"
            attrs.append(f'label="{mark}"')
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {_q(a)} -> {_q(b)}{suffix};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(doc: NetworkDocument, cover: Optional[TreeCover] = None,
            verdict: Optional[Verdict] = None) -> str:
    """The document itself plus an ``annotations`` block that parsing ignores."""
    out = document_to_dict(doc)
    if cover is not None:
        from .io import cover_to_dict

        out["cover"] = cover_to_dict(cover, doc.name_of)
    notes = {"roles": roles(doc)}
    if verdict is not None:
        notes["verdict"] = verdict.value
    out["annotations"] = notes
    return json.dumps(out, indent=2) + "\n"
