"""Command line front end.  Every subcommand loads a document, calls one library
operation and prints its JSON report."""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
from pathlib import Path

from . import io
from .analysis import classify, iet_to_system, is_pseudo_surface_forest, system_index
from .corpus import random_iet
from .errors import BudgetExhausted, DocumentError, InvariantError, RipsError
from .rips import elementary_step, is_reduced, run
from .scalar import Field
from .system import cayley_view, independence_certificate

log = logging.getLogger("ripsmachine")

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


def render_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _write(text: str, dest: str | None) -> None:
    if dest is None or dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


# -- reports (shared with the tests, which compare them with direct library calls) -------------

def validate_report(doc: io.SystemDocument, reduced_depth: int | None = None) -> dict:
    s = doc.system
    f = s.forest
    out = {
        "valid": True,
        "name": doc.name,
        "field": {"d": f.field.d},
        "trees": f.n_trees,
        "edges": len(f.edges()),
        "total_length": s.total_length().render(),
        "generators": [a.name for a in s.generators],
        "graph": s.associated_graph().summary(),
        "pseudo_surface": is_pseudo_surface_forest(s),
        "independence": s.independence,
    }
    if reduced_depth:
        out["reduced"] = is_reduced(s, reduced_depth).to_json()
    return out


def step_report(step, with_moves: bool) -> dict:
    out = {
        "fixed_point": step.is_fixed_point,
        "before": step.before.associated_graph().summary(),
        "after": step.after.associated_graph().summary(),
        "peripheral_len": step.peripheral_length.render(),
        "total_length": step.after.total_length().render(),
    }
    if with_moves:
        out["moves"] = [m.to_json() for m in step.moves]
    return out


def cayley_report(cv) -> dict:
    return {
        "base": cv.base.render(),
        "depth": cv.depth,
        "truncated": cv.truncated,
        "view": cv.graph.summary(),
        "core": {"vertices": sorted(cv.core.vertices), "edges": len(cv.core.edges)},
        "open_vertices": sorted(cv.open_vertices),
        "index": cv.index,
    }


# -- subcommands ----------------------------------------------------------------------------------

def cmd_validate(args) -> int:
    doc = io.load(args.file)
    rep = validate_report(doc, args.reduced_depth)
    _write(render_json(rep), None)
    if args.reduced_depth and rep["reduced"]["status"] == "NotReduced":
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_graph(args) -> int:
    doc = io.load(args.file)
    g = doc.system.associated_graph()
    dot = g.to_dot(doc.name or "Gamma") + "\n"
    if args.dot is None:
        sys.stdout.write(dot)
    else:
        _write(dot, args.dot)
        _write(render_json(g.summary()), None)
    return EXIT_OK


def cmd_step(args) -> int:
    doc = io.load(args.file)
    step = elementary_step(doc.system)
    if args.output:
        meta = dict(doc.metadata)
        meta["provenance"] = f"one elementary step from {doc.name or Path(args.file).name}"
        io.save(io.document_from_system(step.after, meta), args.output)
    _write(render_json(step_report(step, args.moves)), None)
    return EXIT_OK


def cmd_run(args) -> int:
    doc = io.load(args.file)
    r = run(doc.system, args.max_steps, budget_breakpoints=args.budget_breakpoints,
            check_reduced_depth=args.check_reduced)
    _write(render_json(r.to_json()), args.report)
    if args.report:
        _write(render_json({"halted": r.halted, "halt_step": r.halt_step,
                            "final_graph_index": r.stats[-1].graph_index}), None)
    return EXIT_BUDGET if r.budget_exhausted else EXIT_OK


def cmd_index(args) -> int:
    doc = io.load(args.file)
    r = run(doc.system, args.max_steps, budget_breakpoints=args.budget_breakpoints)
    _write(render_json(system_index(doc.system, r).to_json()), None)
    return EXIT_BUDGET if r.budget_exhausted else EXIT_OK


def cmd_classify(args) -> int:
    doc = io.load(args.file)
    r = run(doc.system, args.max_steps, budget_breakpoints=args.budget_breakpoints)
    c = classify(doc.system, r, depth=args.depth, window=args.window)
    _write(render_json(c.to_json()), None)
    return EXIT_BUDGET if r.budget_exhausted else EXIT_OK


def cmd_cayley(args) -> int:
    doc = io.load(args.file)
    s = doc.system
    p = s.forest.parse_point(args.point)
    cv = cayley_view(s, p, args.depth)
    if args.dot:
        sys.stdout.write(cv.core.to_dot("cayley") + "\n")
    else:
        _write(render_json(cayley_report(cv)), None)
    return EXIT_OK


def cmd_iet(args) -> int:
    fld = Field(args.field_d)
    if args.lengths is None:
        if args.n is None:
            raise RipsError("give --lengths/--perm or --n for a random exchange")
        d = args.field_d or 5
        fld = Field(d)
        lengths, perm = random_iet(random.Random(args.seed), args.n, d)
    else:
        lengths = [fld.parse(x) for x in args.lengths.split(",")]
        if args.perm is None:
            raise RipsError("--perm is required with --lengths")
        perm = [int(x) for x in args.perm.split(",")]
    s = iet_to_system(lengths, perm, fld, name=args.name or "")
    meta = {"provenance": "iet " + ",".join(str(p) for p in perm)}
    _write(io.dumps(io.document_from_system(s, meta)), args.output)
    return EXIT_OK


def cmd_cert(args) -> int:
    doc = io.load(args.file)
    rep = independence_certificate(doc.system, args.depth, budget=args.budget)
    _write(render_json(rep.to_json()), None)
    return EXIT_OK if rep.passes else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ripsmachine", description="Exact Rips machine for systems of isometries.")
    ap.add_argument("--budget-breakpoints", type=int, default=None,
                    help="stop a run once the system has more breakpoints than this")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized generators")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load a document and report its invariants")
    p.add_argument("file")
    p.add_argument("--reduced-depth", type=int, default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("graph", help="associated graph in DOT")
    p.add_argument("file")
    p.add_argument("--dot", default=None, help="write DOT here and print a summary")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("step", help="one elementary step")
    p.add_argument("file")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--moves", action="store_true")
    p.set_defaults(func=cmd_step)

    p = sub.add_parser("run", help="iterate the machine")
    p.add_argument("file")
    p.add_argument("--max-steps", type=int, default=50)
    p.add_argument("--report", default=None)
    p.add_argument("--check-reduced", type=int, default=None, metavar="DEPTH")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("index", help="index of the system")
    p.add_argument("file")
    p.add_argument("--max-steps", type=int, default=50)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("classify", help="surface type / Levitt evidence")
    p.add_argument("file")
    p.add_argument("--max-steps", type=int, default=50)
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--window", type=int, default=10)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("cayley", help="Cayley view of the orbit of a point")
    p.add_argument("file")
    p.add_argument("--point", required=True)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--dot", action="store_true")
    p.set_defaults(func=cmd_cayley)

    p = sub.add_parser("iet", help="document for an interval exchange")
    p.add_argument("--lengths", default=None)
    p.add_argument("--perm", default=None)
    p.add_argument("--field-d", type=int, default=0)
    p.add_argument("--n", type=int, default=None, help="random exchange with n intervals (uses --seed)")
    p.add_argument("--name", default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_iet)

    p = sub.add_parser("cert", help="independence certificate")
    p.add_argument("file")
    p.add_argument("--depth", type=int, default=20)
    p.add_argument("--budget", type=int, default=2_000_000)
    p.set_defaults(func=cmd_cert)
    return ap


def _error(kind: str, exc: BaseException, **extra) -> None:
    payload = {"error": kind, "message": str(exc), **extra}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def main(argv=None) -> int:
    level = os.environ.get("RIPS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except BudgetExhausted as exc:
        _error("budget_exhausted", exc)
        return EXIT_BUDGET
    except InvariantError as exc:
        _error("invariant", exc)
        return EXIT_NEGATIVE
    except DocumentError as exc:
        _error("document", exc, path=exc.path, line=exc.line, reason=exc.reason)
        return EXIT_INPUT
    except (RipsError, ValueError, OSError) as exc:
        _error(type(exc).__name__, exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
