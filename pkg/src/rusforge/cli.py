"""Command line entry point.

Subcommands cover the batch pipeline: validate a project, extract its
entities and predicates, build the knowledge base, query a triples file,
and serve the HTTP API. Diagnostics go to stderr, artifacts to files or
stdout, so commands compose in shells.

Exit codes: 0 success, 1 validation diagnostics or untyped entities,
2 usage or schema errors, 3 internal errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .document import Project, load_project, validate_project
from .errors import (
    LexError,
    NtSyntaxError,
    QuerySyntaxError,
    QueryUnboundError,
    RusforgeError,
    SchemaError,
    UntypedError,
    VersionError,
)
from .extraction import assign_types, check_glossary, extract, report_to_json
from .kb import build_kb, export_graph, parse_ntriples, serialize_ntriples
from .query import evaluate, parse_query, results_to_csv

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

NS_ENV = "RUSFORGE_NS"


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (SchemaError, VersionError) as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NtSyntaxError, QuerySyntaxError, QueryUnboundError, LexError) as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UntypedError as exc:
        print(f"error [{exc.code}]: untyped entities:", file=sys.stderr)
        for entity in exc.entities:
            print(f"  {entity}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RusforgeError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - safety net
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rusforge",
        description="Validate, extract, formalize and query use-case scenario projects.",
    )
    parser.add_argument("--version", action="version", version=f"rusforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="match every scenario step against the template set")
    p_validate.add_argument("--project", required=True, help="project JSON file")
    p_validate.set_defaults(func=cmd_validate)

    p_extract = sub.add_parser("extract", help="write the entity/predicate extraction report")
    p_extract.add_argument("--project", required=True)
    p_extract.add_argument("--out", help="report JSON file (default stdout)")
    p_extract.add_argument("--glossary-check", action="store_true", help="warn about terms missing from the glossary")
    p_extract.add_argument("--fig", help="also render occurrence counts to this image file")
    p_extract.set_defaults(func=cmd_extract)

    p_build = sub.add_parser("build", help="generate the knowledge base")
    p_build.add_argument("--project", required=True)
    p_build.add_argument("--out", help="triples file (default stdout)")
    p_build.add_argument("--dot", help="also write a DOT graph")
    p_build.add_argument("--fig", help="also render the instance graph to this image file")
    p_build.add_argument("--default-type", help="type for entities without an assignment")
    p_build.add_argument("--include-provenance", action="store_true", help="include statement nodes in the DOT graph")
    p_build.set_defaults(func=cmd_build)

    p_query = sub.add_parser("query", help="run a SELECT query over a triples file")
    p_query.add_argument("--kb", required=True, help="triples (.nt) file")
    p_query.add_argument("query", nargs="?", help="query text")
    p_query.add_argument("--file", help="read the query from a file")
    p_query.add_argument("--ns", help="IRI prefix bound to ns: (default: inferred, or " + NS_ENV + ")")
    p_query.add_argument("--out", help="CSV output file (default stdout)")
    p_query.set_defaults(func=cmd_query)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--port", type=int, default=8421)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--storage", required=True, help="directory for project files")
    p_serve.add_argument("--ui", help="directory with the built editor bundle to serve at /")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def _load(path: str) -> Project:
    project = load_project(Path(path).read_bytes())
    override = os.environ.get(NS_ENV)
    if override:
        from dataclasses import replace

        project = replace(project, namespace=override)
    return project


def _validated(args) -> tuple:
    project = _load(args.project)
    report = validate_project(project)
    for verdict in report.diagnostics():
        ref = verdict.ref
        where = f"{args.project}:{ref.actor}/{ref.use_case}/{ref.scenario}:{ref.step}"
        if verdict.reason == "lex_error":
            print(f'{where}: invalid token at column {verdict.column}: "{verdict.text}"', file=sys.stderr)
        else:
            print(f'{where}: no template matches: "{verdict.text}"', file=sys.stderr)
    return project, report


def cmd_validate(args) -> int:
    _, report = _validated(args)
    for warning in report.warnings:
        ref = warning.ref
        print(
            f"{args.project}:{ref.actor}/{ref.use_case}/{ref.scenario}:{ref.step}:"
            f" warning [{warning.code}]: {warning.side} step with subject {warning.subject!r}",
            file=sys.stderr,
        )
    return EXIT_OK if report.ok else EXIT_DIAGNOSTICS


def cmd_extract(args) -> int:
    _, report = _validated(args)
    if not report.ok:
        return EXIT_DIAGNOSTICS
    extraction = extract(report.project)
    warnings = None
    if args.glossary_check:
        warnings = check_glossary(extraction, report.project.glossary)
        for warning in warnings:
            print(f"warning [{warning.code}]: {warning.term} ({len(warning.occurrences)} occurrences)", file=sys.stderr)
    payload = report_to_json(extraction, warnings)
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.write(payload.decode("utf-8"))
    if args.fig:
        from .viz import save_figure, term_counts_figure

        save_figure(term_counts_figure(extraction), args.fig)
    return EXIT_OK


def cmd_build(args) -> int:
    _, report = _validated(args)
    if not report.ok:
        return EXIT_DIAGNOSTICS
    project = report.project
    typed = assign_types(extract(project), project.type_assignments, args.default_type)
    kb = build_kb(project, typed)
    payload = serialize_ntriples(kb)
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.write(payload.decode("utf-8"))
    if args.dot:
        Path(args.dot).write_bytes(export_graph(kb, include_provenance=args.include_provenance))
    if args.fig:
        from .viz import kb_figure, save_figure

        save_figure(kb_figure(kb), args.fig)
    return EXIT_OK


def cmd_query(args) -> int:
    if bool(args.query) == bool(args.file):
        print("error: provide a query either inline or via --file", file=sys.stderr)
        return EXIT_USAGE
    query_text = args.query if args.query else Path(args.file).read_text("utf-8")
    namespace = args.ns or os.environ.get(NS_ENV)
    kb = parse_ntriples(Path(args.kb).read_bytes(), namespace)
    query = parse_query(query_text, kb.namespace)
    solutions = evaluate(query, kb)
    output = results_to_csv(query, solutions)
    if args.out:
        Path(args.out).write_text(output, "utf-8")
    else:
        sys.stdout.write(output)
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import run_server

    run_server(host=args.host, port=args.port, storage=Path(args.storage), ui_dir=args.ui)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
