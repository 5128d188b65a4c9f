"""Conjunctive graph-pattern queries over a knowledge base.

A deliberately small SELECT subset::

    SELECT ?s ?o WHERE { ?s ns:inserts ?o . ?s rdf:type ns:Actor . }

Terms are variables (``?name``), absolute IRIs in angle brackets, prefixed
names with the predeclared prefixes ``ns:`` (the knowledge base namespace),
``ucat:`` and ``rdf:``, or quoted literals with an optional ``^^<datatype>``.
Evaluation is a nested-loop join over the patterns in writing order with
binding propagation; results are deduplicated after projection and sorted
for determinism.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass

from .errors import QuerySyntaxError, QueryUnboundError
from .kb import (
    IriTerm,
    KnowledgeBase,
    LiteralTerm,
    RDF_TYPE,
    UCAT_NS,
    XSD_INTEGER,
    XSD_STRING,
    term_text,
)

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"

_DATATYPES = {XSD_STRING: "string", XSD_INTEGER: "integer"}


@dataclass(frozen=True)
class Var:
    name: str


PatternTerm = Var | IriTerm | LiteralTerm


@dataclass(frozen=True)
class TriplePattern:
    s: PatternTerm
    p: PatternTerm
    o: PatternTerm


@dataclass(frozen=True)
class SelectQuery:
    projection: tuple[str, ...]
    patterns: tuple[TriplePattern, ...]


SolutionMapping = dict[str, "IriTerm | LiteralTerm"]

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<var>\?[A-Za-z][A-Za-z0-9_]*)
      | (?P<iri><[^<>\s]*>)
      | (?P<pname>[A-Za-z][A-Za-z0-9_]*:[A-Za-z][A-Za-z0-9_]*)
      | (?P<string>"(?:[^"\\]|\\.)*")
      | (?P<keyword>[A-Za-z][A-Za-z0-9_]*)
      | (?P<punct>\{|\}|\.|\^\^)
    )""",
    re.VERBOSE,
)

_STRING_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def next(self) -> tuple[str, str, int] | None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        if self.pos >= len(self.text):
            return None
        m = _TOKEN_RE.match(self.text, self.pos)
        if not m or m.end() == self.pos:
            raise QuerySyntaxError(f"unexpected character {self.text[self.pos]!r}", self.pos)
        start = m.start(m.lastgroup)
        self.pos = m.end()
        return m.lastgroup, m.group(m.lastgroup), start

    def peek(self) -> tuple[str, str, int] | None:
        saved = self.pos
        token = self.next()
        self.pos = saved
        return token


def parse_query(text: str, namespace: str) -> SelectQuery:
    """Parse a SELECT query; ``namespace`` binds the ``ns:`` prefix.

    Raises QuerySyntaxError with a character offset, or QueryUnboundError if
    a projected variable occurs in no pattern.
    """
    prefixes = {"ns": namespace, "ucat": UCAT_NS, "rdf": RDF_NS}
    scanner = _Scanner(text)

    def expect_keyword(word: str):
        token = scanner.next()
        if token is None or token[0] != "keyword" or token[1].lower() != word:
            raise QuerySyntaxError(f"expected {word.upper()}", token[2] if token else len(text))

    def expect_punct(symbol: str):
        token = scanner.next()
        if token is None or token[0] != "punct" or token[1] != symbol:
            raise QuerySyntaxError(f"expected {symbol!r}", token[2] if token else len(text))

    expect_keyword("select")
    projection: list[str] = []
    while True:
        token = scanner.peek()
        if token is None:
            raise QuerySyntaxError("expected WHERE", len(text))
        kind, value, start = token
        if kind == "var":
            scanner.next()
            name = value[1:]
            if name in projection:
                raise QuerySyntaxError(f"duplicate projected variable ?{name}", start)
            projection.append(name)
            continue
        break
    if not projection:
        token = scanner.peek()
        raise QuerySyntaxError("expected at least one projected variable", token[2] if token else len(text))
    expect_keyword("where")
    expect_punct("{")

    def parse_term(allow_literal: bool) -> PatternTerm:
        token = scanner.next()
        if token is None:
            raise QuerySyntaxError("unexpected end of query", len(text))
        kind, value, start = token
        if kind == "var":
            return Var(value[1:])
        if kind == "iri":
            return IriTerm(value[1:-1])
        if kind == "pname":
            prefix, _, local = value.partition(":")
            if prefix not in prefixes:
                raise QuerySyntaxError(f"unknown prefix {prefix!r}", start)
            if prefix == "ns" and not prefixes["ns"]:
                raise QuerySyntaxError("ns: prefix is not bound", start)
            return IriTerm(prefixes[prefix] + local)
        if kind == "string":
            if not allow_literal:
                raise QuerySyntaxError("literal not allowed in subject or predicate position", start)
            lexical = _unescape_string(value[1:-1], start)
            datatype = "string"
            nxt = scanner.peek()
            if nxt is not None and nxt[0] == "punct" and nxt[1] == "^^":
                scanner.next()
                dt_token = scanner.next()
                if dt_token is None or dt_token[0] != "iri":
                    raise QuerySyntaxError("expected datatype IRI after ^^", start)
                datatype_iri = dt_token[1][1:-1]
                if datatype_iri not in _DATATYPES:
                    raise QuerySyntaxError(f"unsupported datatype <{datatype_iri}>", dt_token[2])
                datatype = _DATATYPES[datatype_iri]
            try:
                return LiteralTerm(lexical, datatype)
            except ValueError as exc:
                raise QuerySyntaxError(str(exc), start) from exc
        raise QuerySyntaxError(f"unexpected token {value!r}", start)

    patterns: list[TriplePattern] = []
    while True:
        token = scanner.peek()
        if token is None:
            raise QuerySyntaxError("expected '}'", len(text))
        if token[0] == "punct" and token[1] == "}":
            scanner.next()
            break
        s = parse_term(allow_literal=False)
        p = parse_term(allow_literal=False)
        o = parse_term(allow_literal=True)
        expect_punct(".")
        patterns.append(TriplePattern(s, p, o))
    if not patterns:
        raise QuerySyntaxError("a query needs at least one pattern", len(text))
    trailing = scanner.peek()
    if trailing is not None:
        raise QuerySyntaxError(f"trailing content {trailing[1]!r}", trailing[2])

    pattern_vars = {
        term.name
        for pattern in patterns
        for term in (pattern.s, pattern.p, pattern.o)
        if isinstance(term, Var)
    }
    unbound = [v for v in projection if v not in pattern_vars]
    if unbound:
        raise QueryUnboundError(unbound)
    return SelectQuery(tuple(projection), tuple(patterns))


def _unescape_string(raw: str, position: int) -> str:
    out = []
    i = 0
    while i < len(raw):
        c = raw[i]
        if c == "\\":
            nxt = raw[i + 1] if i + 1 < len(raw) else ""
            if nxt not in _STRING_UNESCAPES:
                raise QuerySyntaxError(f"bad escape \\{nxt}", position)
            out.append(_STRING_UNESCAPES[nxt])
            i += 2
            continue
        out.append(c)
        i += 1
    return "".join(out)


def evaluate(query: SelectQuery, kb: KnowledgeBase) -> list[SolutionMapping]:
    """All variable bindings under which every pattern instantiates to a
    triple of the knowledge base.

    Nested-loop join in pattern order with binding propagation; duplicates
    (after projection) removed; rows sorted by their projected values.
    """
    triples = tuple(kb.triples)
    rows: set[tuple] = set()

    def join(i: int, binding: dict):
        if i == len(query.patterns):
            rows.add(tuple(binding[name] for name in query.projection))
            return
        pattern = query.patterns[i]
        for triple in triples:
            extended = _unify(pattern, triple, binding)
            if extended is not None:
                join(i + 1, extended)

    join(0, {})
    ordered = sorted(rows, key=lambda row: tuple(term_text(v) for v in row))
    return [dict(zip(query.projection, row)) for row in ordered]


def _unify(pattern: TriplePattern, triple, binding: dict):
    extended = None
    for term, value in ((pattern.s, triple.subject), (pattern.p, triple.predicate), (pattern.o, triple.object)):
        if isinstance(term, Var):
            bound = (extended or binding).get(term.name)
            if bound is None:
                if extended is None:
                    extended = dict(binding)
                extended[term.name] = value
            elif bound != value:
                return None
        elif term != value:
            return None
    return extended if extended is not None else dict(binding)


def _cell(value: IriTerm | LiteralTerm) -> str:
    return value.iri if isinstance(value, IriTerm) else value.lexical


def results_to_csv(query: SelectQuery, solutions: list[SolutionMapping]) -> str:
    """CSV text: header row of projected variable names, one row per
    solution, LF line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(query.projection)
    for solution in solutions:
        writer.writerow([_cell(solution[name]) for name in query.projection])
    return buffer.getvalue()


def results_to_table(query: SelectQuery, solutions: list[SolutionMapping]) -> dict:
    """JSON-ready form: {"columns": [...], "rows": [[...], ...]}."""
    return {
        "columns": list(query.projection),
        "rows": [[_cell(solution[name]) for name in query.projection] for solution in solutions],
    }
