"""Command-line front end: ``netident check | allocate | oracle | export``.

Exit codes for ``check`` follow the overall verdict (0 identifiable,
1 unknown, 2 not identifiable). Usage errors exit with 3 and unreadable
network descriptions with 4. ``oracle`` exits with 5 when the numerics
contradict a structural verdict.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Callable, Optional

from . import __version__
from .checkers import (DEFAULT_BUDGET, WitnessSets, corollary3_check, iterative_path_check,
                       necessary_check, theorem1_check, witness_conditions)
from .covering import (AllocationResult, Orientation, allocate_signals, prune_redundant,
                       theorem2_check)
from .errors import GraphError, ParseError, RankDeficientSolve, SingularAtSample
from .export import to_dot, to_json
from .fixtures import FIXTURES, fixture_text
from .graph import disjoint_path_count, transpose
from .io import NetworkDocument, cover_to_dict, dumps_json, parse_document
from .model import ModelSet, Verdict
from .oracle import (frequency_samples, jacobian_report, layered_reconstruction, numeric_rank,
                     sample_instance)

REPORT_FORMAT = "netident.report/1"
EXIT_USAGE = 3
EXIT_PARSE = 4
EXIT_DISAGREE = 5
METHODS = ("necessary", "iterative", "vertexwise", "dual", "covering")
SEED_ENV = "NETIDENT_SEED"
FIXTURE_PREFIX = "fixture:"
RECON_TOL = 1e-6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# report builders (plain dicts so JSON output is direct)


def _names(doc: NetworkDocument, vs) -> list[str]:
    return [doc.name_of(v) for v in sorted(vs)]


def _edge(doc: NetworkDocument, e) -> list[str]:
    return [doc.name_of(e[0]), doc.name_of(e[1])]


def _necessary(doc, ms, budget):
    rep = necessary_check(ms)
    return {"verdict": rep.verdict.value, "failing": _names(doc, rep.failing),
            "vertices": [{"vertex": doc.name_of(c.vertex), "in_paths": c.in_paths,
                          "in_required": c.in_required, "out_paths": c.out_paths,
                          "out_required": c.out_required, "ok": c.ok} for c in rep.vertices],
            "notes": rep.notes}


def _iterative(doc, ms, budget):
    rep = iterative_path_check(ms)
    return {"verdict": rep.verdict.value, "rounds": rep.rounds,
            "edges": [{"edge": _edge(doc, e), "verdict": r.verdict.value, "round": r.round,
                       "pair": _edge(doc, r.pair) if r.pair else None,
                       "known": r.known_a_priori} for e, r in rep.edges.items()],
            "notes": rep.notes}


def _vertexwise_dict(doc, ms, rep):
    dag = ms.dag
    out = []
    for v, w in sorted(rep.witnesses.items()):
        # the path counts are stated in the orientation the witness lives in
        if w.dual:
            b1, b2 = witness_conditions(transpose(dag), WitnessSets(v, w.excited_set, w.measured_set,
                                                                    w.siblings, w.hidden, w.cut))
        else:
            b1, b2 = witness_conditions(dag, w)
        out.append({"vertex": doc.name_of(v), "measured_set": _names(doc, w.measured_set),
                    "excited_set": _names(doc, w.excited_set), "siblings": _names(doc, w.siblings),
                    "hidden": _names(doc, w.hidden), "cut": _names(doc, w.cut),
                    "paths_full": b1, "paths_without_vertex": b2})
    return {"verdict": rep.verdict.value, "failing": _names(doc, rep.failing),
            "measured_ok": {doc.name_of(v): ok for v, ok in sorted(rep.measured_ok.items())},
            "witnesses": out, "notes": rep.notes}


def _vertexwise(doc, ms, budget):
    return _vertexwise_dict(doc, ms, theorem1_check(ms, budget))


def _dual(doc, ms, budget):
    return _vertexwise_dict(doc, ms, corollary3_check(ms, budget))


def _covering(doc, ms, budget):
    rep = theorem2_check(ms)
    cov = lambda c: cover_to_dict(c, doc.name_of) if c is not None else None
    return {"verdict": rep.verdict.value, "tree_cover": cov(rep.tree_cover),
            "anti_tree_cover": cov(rep.anti_tree_cover), "notes": rep.notes}


RUNNERS: dict[str, Callable] = {"necessary": _necessary, "iterative": _iterative,
                                "vertexwise": _vertexwise, "dual": _dual, "covering": _covering}


def combine(verdicts: list[Verdict]) -> Verdict:
    """Strongest verdict among one-sided checks."""
    if Verdict.NOT_IDENTIFIABLE in verdicts:
        return Verdict.NOT_IDENTIFIABLE
    if Verdict.IDENTIFIABLE in verdicts:
        return Verdict.IDENTIFIABLE
    return Verdict.UNKNOWN


def check_report(doc: NetworkDocument, method: str = "all", budget: Optional[int] = DEFAULT_BUDGET) -> dict:
    ms = doc.to_model()
    order = METHODS if method == "all" else (method,)
    results = {}
    for m in order:
        results[m] = RUNNERS[m](doc, ms, budget)
        if m == "necessary" and method == "all" and results[m]["verdict"] == Verdict.NOT_IDENTIFIABLE.value:
            break
    verdict = combine([Verdict(r["verdict"]) for r in results.values()])
    return {"format": REPORT_FORMAT, "command": "check", "method": method,
            "vertices": len(doc.names), "edges": len(doc.edges),
            "excited": list(doc.excited), "measured": list(doc.measured),
            "verdict": verdict.value, "methods": results}


def _fmt_edge(e) -> str:
    return f"{e[0]}->{e[1]}"


def render_check_text(rep: dict) -> str:
    lines = [f"network: {rep['vertices']} vertices, {rep['edges']} edges",
             f"excited: {' '.join(rep['excited']) or '-'}",
             f"measured: {' '.join(rep['measured']) or '-'}"]
    for m, r in rep["methods"].items():
        lines.append(f"[{m}] {r['verdict']}")
        if m == "necessary" and r["failing"]:
            lines.append("  failing vertices: " + " ".join(r["failing"]))
        if m == "iterative":
            for k in range(1, r["rounds"] + 1):
                es = [_fmt_edge(x["edge"]) for x in r["edges"] if x["round"] == k]
                lines.append(f"  round {k}: " + " ".join(es))
            left = [_fmt_edge(x["edge"]) for x in r["edges"] if x["verdict"] != "identifiable"]
            if left:
                lines.append("  undecided: " + " ".join(left))
        if m in ("vertexwise", "dual"):
            for w in r["witnesses"]:
                lines.append(f"  vertex {w['vertex']}: R_j={{{','.join(w['excited_set'])}}} "
                             f"C_j={{{','.join(w['measured_set'])}}} "
                             f"paths {w['paths_full']}/{w['paths_without_vertex']}")
            if r["failing"]:
                lines.append("  failing vertices: " + " ".join(r["failing"]))
        if m == "covering":
            for key in ("tree_cover", "anti_tree_cover"):
                if r[key]:
                    roots = " ".join(t["root"] for t in r[key]["trees"])
                    lines.append(f"  {key.replace('_', ' ')}: {len(r[key]['trees'])} (roots {roots})")
        for note in r.get("notes", []):
            lines.append(f"  note: {note}")
    lines.append(f"overall: {rep['verdict']}")
    return "\n".join(lines) + "\n"


def render_check_tsv(rep: dict) -> str:
    rows = [("method", "item", "verdict", "detail")]
    for m, r in rep["methods"].items():
        rows.append((m, "*", r["verdict"], ""))
        if m == "iterative":
            for x in r["edges"]:
                rows.append((m, _fmt_edge(x["edge"]), x["verdict"],
                             f"round={x['round']}" if x["round"] else ""))
        if m == "necessary":
            for x in r["vertices"]:
                rows.append((m, x["vertex"], "ok" if x["ok"] else "fail",
                             f"in={x['in_paths']}/{x['in_required']} out={x['out_paths']}/{x['out_required']}"))
        if m in ("vertexwise", "dual"):
            for w in r["witnesses"]:
                rows.append((m, w["vertex"], "witness",
                             f"R_j={','.join(w['excited_set'])} C_j={','.join(w['measured_set'])}"))
    rows.append(("overall", "*", rep["verdict"], ""))
    return "\n".join("\t".join(map(str, row)) for row in rows) + "\n"


# ---------------------------------------------------------------------------
# allocation


def _parse_overrides(items, doc: NetworkDocument) -> dict[int, str]:
    out = {}
    ix = doc.index()
    for item in items or []:
        name, sep, role = item.partition("=")
        if not sep or role not in ("excite", "measure"):
            raise UsageError(f"override must look like NAME=excite or NAME=measure, got {item!r}")
        if name not in ix:
            raise UsageError(f"override names unknown vertex {name!r}")
        out[ix[name]] = role
    return out


def allocation_for(ms: ModelSet, mode: str, prune: bool, overrides, exhaustive: bool,
                   budget: Optional[int]) -> AllocationResult:
    modes = ("tree", "antitree") if mode == "best" else (mode,)
    best = None
    for m in modes:
        res = allocate_signals(ms.dag, m, overrides, exhaustive)
        if prune:
            res = prune_redundant(ModelSet(ms.dag, res.pattern, ms.known), res, budget)
        if best is None or res.signal_count < best.signal_count:
            best = res
    return best


def allocate_report(doc, res: AllocationResult, ms: ModelSet) -> dict:
    final = ModelSet(ms.dag, res.pattern, ms.known)
    edge_tree = res.cover.tree_of()
    return {"format": REPORT_FORMAT, "command": "allocate", "mode": res.orientation.value,
            "excited": _names(doc, res.pattern.excited), "measured": _names(doc, res.pattern.measured),
            "pruned": _names(doc, res.pruned), "trees": len(res.cover),
            "roots": _names(doc, res.cover.roots), "leaves": _names(doc, res.cover.leaves),
            "cover": cover_to_dict(res.cover, doc.name_of),
            "edges": [{"edge": _edge(doc, e), "tree": edge_tree[e]} for e in ms.dag.sorted_edges()],
            "covering_verdict": theorem2_check(final).verdict.value if not res.pruned else None,
            "vertexwise_verdict": (theorem1_check(final).verdict if res.orientation is Orientation.TREE
                                   else corollary3_check(final).verdict).value}


def render_allocate_text(rep: dict) -> str:
    lines = [f"mode: {rep['mode']}", f"trees: {rep['trees']} (roots {' '.join(rep['roots'])})",
             f"excite: {' '.join(rep['excited'])}", f"measure: {' '.join(rep['measured'])}",
             f"pruned: {' '.join(rep['pruned']) or '-'}"]
    for x in rep["edges"]:
        lines.append(f"  {_fmt_edge(x['edge'])}\ttree {x['tree']}")
    lines.append(f"vertex-wise recheck: {rep['vertexwise_verdict']}")
    return "\n".join(lines) + "\n"


def render_allocate_tsv(rep: dict) -> str:
    rows = [("vertex_or_edge", "role_or_tree")]
    for n in rep["excited"]:
        rows.append((n, "excite"))
    for n in rep["measured"]:
        rows.append((n, "measure"))
    for n in rep["pruned"]:
        rows.append((n, "pruned"))
    for x in rep["edges"]:
        rows.append((_fmt_edge(x["edge"]), str(x["tree"])))
    return "\n".join("\t".join(r) for r in rows) + "\n"


# ---------------------------------------------------------------------------
# oracle


def _with_retries(fn, seed: int, retries: int = 3):
    """Call ``fn(samples)`` and redraw the sample points if a module has a pole there."""
    last = None
    for attempt in range(retries + 1):
        try:
            return fn(frequency_samples(seed=seed + 1000 * attempt)), None
        except (SingularAtSample, RankDeficientSolve) as exc:
            last = exc
    return None, str(last)


def oracle_report(doc: NetworkDocument, seed: int, trials: int,
                  budget: Optional[int] = DEFAULT_BUDGET) -> dict:
    ms = doc.to_model()
    orders = doc.model_orders()
    structural = {m: RUNNERS[m](doc, ms, budget)["verdict"] for m in METHODS}
    claimed = combine([Verdict(v) for v in structural.values()])
    vw = theorem1_check(ms, budget)
    R = ms.excited
    targets = []
    for j in sorted(ms.measured):
        if ms.dag.pred[j]:
            targets.append((f"in-neighbours of {doc.name_of(j)}", ms.dag.in_neighbors(j), R))
    targets.append(("measured vs excited", ms.measured, R))
    for v, w in sorted(vw.witnesses.items()):
        targets.append((f"witness of {doc.name_of(v)}", w.measured_set, w.excited_set))
    rank_rows, jac_rows, recon_rows, problems = [], [], [], []
    spectra, residuals = {}, {}
    for t in range(trials):
        s = seed + t
        inst = sample_instance(ms, s, orders)
        for label, rows, cols in targets:
            paths = disjoint_path_count(ms.dag, cols, rows)
            rank, err = _with_retries(lambda zs: numeric_rank(inst, rows, cols, zs), s)
            rank_rows.append({"seed": s, "target": label, "rank": rank, "paths": paths,
                              "agree": rank == paths, "error": err})
        try:
            rep = jacobian_report(ms, s, orders=orders, instance=inst)
            status = "withheld" if rep.ambiguous else ("full" if rep.full_rank else "deficient")
            jac_rows.append({"seed": s, "rank": rep.rank, "parameters": rep.parameters, "status": status})
            spectra[s] = rep.singular_values
        except SingularAtSample as exc:
            jac_rows.append({"seed": s, "rank": None, "parameters": inst.parameter_count,
                             "status": "singular", "error": str(exc)})
        if vw.verdict is Verdict.IDENTIFIABLE:
            res, err = _with_retries(lambda zs: layered_reconstruction(inst, ms, vw.witnesses, zs), s)
            if res is not None:
                residuals[s] = res.residual
                recon_rows.append({"seed": s, "residual": res.residual, "ok": res.residual <= RECON_TOL})
            else:
                recon_rows.append({"seed": s, "residual": None, "ok": False, "error": err})
    by_target: dict[str, list[bool]] = {}
    for row in rank_rows:
        by_target.setdefault(row["target"], []).append(row["agree"])
    for label, agrees in by_target.items():
        if agrees and not any(agrees):
            problems.append(f"rank differs from path count at every seed ({label})")
    statuses = [r["status"] for r in jac_rows]
    if claimed is Verdict.IDENTIFIABLE and statuses and all(x == "deficient" for x in statuses):
        problems.append("structurally identifiable but the Jacobian is rank deficient at every seed")
    if recon_rows and not any(r["ok"] for r in recon_rows):
        problems.append("reconstruction residual above tolerance at every seed")
    return {"format": REPORT_FORMAT, "command": "oracle", "seed": seed, "trials": trials,
            "structural": structural, "verdict": claimed.value, "rank_vs_paths": rank_rows,
            "jacobian": jac_rows, "reconstruction": recon_rows, "disagreements": problems,
            "_spectra": spectra, "_residuals": residuals}


def render_oracle_text(rep: dict) -> str:
    lines = [f"structural verdict: {rep['verdict']} "
             + " ".join(f"{k}={v}" for k, v in rep["structural"].items())]
    lines.append("seed\ttarget\trank\tpaths\tagree")
    for r in rep["rank_vs_paths"]:
        lines.append(f"{r['seed']}\t{r['target']}\t{r['rank']}\t{r['paths']}\t{r['agree']}")
    for r in rep["jacobian"]:
        lines.append(f"jacobian seed {r['seed']}: {r['status']} ({r['rank']}/{r['parameters']})")
    for r in rep["reconstruction"]:
        lines.append(f"reconstruction seed {r['seed']}: residual {r['residual']:.3e}"
                     if r["residual"] is not None else f"reconstruction seed {r['seed']}: failed")
    lines += [f"DISAGREEMENT: {p}" for p in rep["disagreements"]] or ["all checks agree"]
    return "\n".join(lines) + "\n"


def render_oracle_tsv(rep: dict) -> str:
    rows = ["kind\tseed\titem\tvalue\tstatus"]
    for r in rep["rank_vs_paths"]:
        rows.append(f"rank\t{r['seed']}\t{r['target']}\t{r['rank']}/{r['paths']}\t{r['agree']}")
    for r in rep["jacobian"]:
        rows.append(f"jacobian\t{r['seed']}\t*\t{r['rank']}/{r['parameters']}\t{r['status']}")
    for r in rep["reconstruction"]:
        rows.append(f"reconstruction\t{r['seed']}\t*\t{r['residual']}\t{r['ok']}")
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# entry point


def _read(path: str) -> NetworkDocument:
    if path.startswith(FIXTURE_PREFIX):
        name = path[len(FIXTURE_PREFIX):]
        if name not in FIXTURES:
            raise UsageError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
        return parse_document(fixture_text(name))
    if path == "-":
        text = sys.stdin.read()
    else:
        p = Path(path)
        if not p.is_file():
            raise UsageError(f"no such file: {path}")
        text = p.read_text()
    return parse_document(text)


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _public(rep: dict) -> dict:
    return {k: v for k, v in rep.items() if not k.startswith("_")}


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="netident", description="Identifiability of acyclic dynamic networks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("input", help="network file (text or JSON), '-' for stdin, or fixture:NAME")
        sp.add_argument("--format", choices=("text", "json", "tsv"), default="text")
        sp.add_argument("-o", "--output", help="write the report here instead of stdout")
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                        help="path-count evaluations per witness search (0 = unlimited)")

    c = sub.add_parser("check", help="decide identifiability of the given signal pattern")
    common(c)
    c.add_argument("--method", choices=METHODS + ("all",), default="all")
    c.add_argument("--figure", help="also draw the network to this image file")

    a = sub.add_parser("allocate", help="choose excited and measured vertices from a cover")
    common(a)
    a.add_argument("--mode", choices=("tree", "antitree", "best"), default="tree")
    a.add_argument("--prune", action="store_true", help="drop redundant root signals")
    a.add_argument("--exhaustive", action="store_true", help="minimum cover (small graphs only)")
    a.add_argument("--override", action="append", metavar="NAME=ROLE",
                   help="role for an internal vertex: excite or measure")
    a.add_argument("--save", help="write the allocated network (JSON, with cover) here")
    a.add_argument("--figure", help="also draw the allocation to this image file")

    o = sub.add_parser("oracle", help="cross-check structural verdicts numerically")
    common(o)
    o.add_argument("--seed", type=int, default=None, help=f"first seed (default ${SEED_ENV} or 0)")
    o.add_argument("--trials", type=int, default=3)
    o.add_argument("--figure", help="also plot Jacobian spectra and residuals here")

    e = sub.add_parser("export", help="annotated DOT or JSON graph")
    e.add_argument("input")
    e.add_argument("--style", choices=("dot", "json"), default="dot")
    e.add_argument("-o", "--output")
    e.add_argument("--verdict", action="store_true", help="run all checks and add a verdict badge")
    return p


def _budget(args) -> Optional[int]:
    return None if args.budget == 0 else args.budget


def run(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = _read(args.input)
        ms = doc.to_model()
        if args.command == "check":
            rep = check_report(doc, args.method, _budget(args))
            text = {"json": lambda r: json.dumps(r, indent=2) + "\n", "tsv": render_check_tsv,
                    "text": render_check_text}[args.format](rep)
            _emit(text, args.output)
            if args.figure:
                from .plotting import plot_network

                cov = rep["methods"].get("covering", {})
                cover = None
                if cov.get("tree_cover") or cov.get("anti_tree_cover"):
                    cover = NetworkDocument(doc.names, cover=cov.get("tree_cover") or
                                            cov.get("anti_tree_cover")).tree_cover()
                plot_network(ms, args.figure, cover, f"verdict: {rep['verdict']}", doc.names)
            return Verdict(rep["verdict"]).exit_code
        if args.command == "allocate":
            overrides = _parse_overrides(args.override, doc)
            try:
                res = allocation_for(ms, args.mode, args.prune, overrides, args.exhaustive, _budget(args))
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            rep = allocate_report(doc, res, ms)
            text = {"json": lambda r: json.dumps(r, indent=2) + "\n", "tsv": render_allocate_tsv,
                    "text": render_allocate_text}[args.format](rep)
            _emit(text, args.output)
            out_doc = doc.with_signals(res.pattern, res.cover)
            if args.save:
                Path(args.save).write_text(dumps_json(out_doc))
            if args.figure:
                from .plotting import plot_network

                plot_network(ModelSet(ms.dag, res.pattern, ms.known), args.figure, res.cover,
                             f"{rep['mode']} allocation", doc.names)
            return 0
        if args.command == "oracle":
            if args.trials < 1:
                raise UsageError("--trials must be at least 1")
            seed = args.seed if args.seed is not None else _default_seed()
            rep = oracle_report(doc, seed, args.trials, _budget(args))
            public = _public(rep)
            text = {"json": lambda r: json.dumps(r, indent=2) + "\n", "tsv": render_oracle_tsv,
                    "text": render_oracle_text}[args.format](public)
            _emit(text, args.output)
            if args.figure:
                from .plotting import plot_oracle

                plot_oracle(args.figure, rep["_spectra"], rep["_residuals"], f"seed {seed}")
            return EXIT_DISAGREE if rep["disagreements"] else 0
        if args.command == "export":
            verdict = Verdict(check_report(doc)["verdict"]) if args.verdict else None
            text = (to_dot(doc, verdict=verdict) if args.style == "dot"
                    else to_json(doc, doc.tree_cover(), verdict))
            _emit(text, args.output)
            return 0
    except UsageError as exc:
        print(f"netident: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, GraphError) as exc:
        print(f"netident: invalid network: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return EXIT_USAGE


def main(argv: Optional[list[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
