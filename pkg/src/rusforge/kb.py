"""Knowledge-base generation and serialization.

A validated, fully typed project becomes a typed triple graph:

* structure: one class assertion per distinct entity type and one property
  assertion per predicate,
* instances: one type assertion per entity,
* assertions: the extracted triples, deduplicated,
* provenance: one reified statement node per (step, triple) occurrence,
  carrying the triple roles, the step index and side, and links from
  scenario to use case to actor.

Serialization is canonical line-oriented triples (sorted, LF-terminated),
so equal knowledge bases are byte-equal on disk. A DOT export renders the
instance graph for preview.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from urllib.parse import quote, unquote

from .document import Project, project_triples
from .errors import IriError, NtSyntaxError, UntypedError
from .extraction import TypedReport

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
XSD_STRING = "http://www.w3.org/2001/XMLSchema#string"
XSD_INTEGER = "http://www.w3.org/2001/XMLSchema#integer"

UCAT_NS = "urn:ucat:vocab:1#"
VOCAB_VERSION = "1"

UCAT_CLASS = UCAT_NS + "Class"
UCAT_PROPERTY = UCAT_NS + "Property"
UCAT_STATEMENT = UCAT_NS + "Statement"
UCAT_HAS_SUBJECT = UCAT_NS + "hasSubject"
UCAT_HAS_PREDICATE = UCAT_NS + "hasPredicate"
UCAT_HAS_OBJECT = UCAT_NS + "hasObject"
UCAT_IN_STEP = UCAT_NS + "inStep"
UCAT_SIDE = UCAT_NS + "side"
UCAT_IN_SCENARIO = UCAT_NS + "inScenario"
UCAT_IN_USE_CASE = UCAT_NS + "inUseCase"
UCAT_OWNED_BY = UCAT_NS + "ownedBy"
UCAT_BRANCHES_AT = UCAT_NS + "branchesAt"

IRI_RE = re.compile(r"[A-Za-z][A-Za-z0-9+.-]*:[^\x00-\x20<>\"{}|^`\\]*")

_DATATYPES = {XSD_STRING: "string", XSD_INTEGER: "integer"}
_DATATYPE_IRIS = {"string": XSD_STRING, "integer": XSD_INTEGER}


@dataclass(frozen=True)
class IriTerm:
    iri: str

    def __post_init__(self):
        if not IRI_RE.fullmatch(self.iri):
            raise IriError(f"not a valid IRI: {self.iri!r}")


@dataclass(frozen=True)
class LiteralTerm:
    lexical: str
    datatype: str = "string"  # "string" | "integer"

    def __post_init__(self):
        if self.datatype not in _DATATYPE_IRIS:
            raise ValueError(f"unsupported datatype {self.datatype!r}")
        if self.datatype == "integer":
            try:
                int(self.lexical, 10)
            except ValueError:
                raise ValueError(f"not a base-10 integer: {self.lexical!r}") from None


@dataclass(frozen=True)
class KbTriple:
    subject: IriTerm
    predicate: IriTerm
    object: IriTerm | LiteralTerm


@dataclass(frozen=True)
class KnowledgeBase:
    triples: frozenset[KbTriple]
    namespace: str
    vocab_version: str = VOCAB_VERSION


def local_iri(namespace: str, local: str) -> IriTerm:
    """Mint an IRI in a namespace, percent-encoding the local name."""
    if not local:
        raise IriError("empty local name")
    return IriTerm(namespace + quote(local, safe=""))


def integer(value: int) -> LiteralTerm:
    return LiteralTerm(str(value), "integer")


def build_kb(project: Project, typed: TypedReport, namespace: str | None = None) -> KnowledgeBase:
    """Generate the knowledge base of a validated project and its typed
    extraction report.

    Statement nodes are named ``<ucID>_s<step>_<k>`` for main-scenario steps
    and ``<ucID>_alt<j>_s<step>_<k>`` for alternative-scenario steps (k is
    the 1-based triple ordinal within the step), so renumbered alternative
    steps never collide with main steps.
    """
    ns = namespace if namespace is not None else project.namespace
    types = typed.types()
    missing = sorted(e.lexeme for e in typed.entities if e.assigned_type is None)
    if missing:
        raise UntypedError(missing)

    triples: set[KbTriple] = set()

    def emit(s: IriTerm, p: str, o: IriTerm | LiteralTerm):
        triples.add(KbTriple(s, IriTerm(p), o))

    # structure
    for type_name in sorted(set(types.values())):
        emit(local_iri(ns, type_name), RDF_TYPE, IriTerm(UCAT_CLASS))
    for predicate in typed.predicates:
        emit(local_iri(ns, predicate.lexeme), RDF_TYPE, IriTerm(UCAT_PROPERTY))

    # instances
    for entity in typed.entities:
        emit(local_iri(ns, entity.lexeme), RDF_TYPE, local_iri(ns, entity.assigned_type))

    # assertions and provenance
    described_scenarios: set[tuple[str, str]] = set()
    for actor in project.actors:
        for uc in actor.use_cases:
            emit(local_iri(ns, uc.id), UCAT_OWNED_BY, local_iri(ns, actor.name))
    for ref, side, k, triple in project_triples(project):
        s = local_iri(ns, triple.subject)
        p = local_iri(ns, triple.predicate)
        o = local_iri(ns, triple.object)
        triples.add(KbTriple(s, p, o))

        scenario_local = f"{ref.use_case}_{ref.scenario}"
        node_local = (
            f"{ref.use_case}_s{ref.step}_{k}"
            if ref.scenario == "main"
            else f"{ref.use_case}_{ref.scenario}_s{ref.step}_{k}"
        )
        node = local_iri(ns, node_local)
        emit(node, RDF_TYPE, IriTerm(UCAT_STATEMENT))
        emit(node, UCAT_HAS_SUBJECT, s)
        emit(node, UCAT_HAS_PREDICATE, p)
        emit(node, UCAT_HAS_OBJECT, o)
        emit(node, UCAT_IN_STEP, integer(ref.step))
        emit(node, UCAT_SIDE, LiteralTerm(side))
        emit(node, UCAT_IN_SCENARIO, local_iri(ns, scenario_local))
        described_scenarios.add((ref.use_case, ref.scenario))

    for actor in project.actors:
        for uc in actor.use_cases:
            if (uc.id, "main") in described_scenarios:
                emit(local_iri(ns, f"{uc.id}_main"), UCAT_IN_USE_CASE, local_iri(ns, uc.id))
            for j, alt in enumerate(uc.alternatives, start=1):
                if (uc.id, f"alt{j}") in described_scenarios:
                    alt_node = local_iri(ns, f"{uc.id}_alt{j}")
                    emit(alt_node, UCAT_IN_USE_CASE, local_iri(ns, uc.id))
                    emit(alt_node, UCAT_BRANCHES_AT, integer(alt.branch_step))

    return KnowledgeBase(frozenset(triples), ns)


def domain_assertions(kb: KnowledgeBase) -> frozenset[KbTriple]:
    """The extracted subject-predicate-object assertions: triples whose
    predicate is neither the typing relation nor vocabulary-owned."""
    return frozenset(
        t
        for t in kb.triples
        if t.predicate.iri != RDF_TYPE and not t.predicate.iri.startswith(UCAT_NS)
    )


def domain_subgraph(kb: KnowledgeBase) -> KnowledgeBase:
    return KnowledgeBase(domain_assertions(kb), kb.namespace, kb.vocab_version)


# ---------------------------------------------------------------------------
# Canonical triples serialization
# ---------------------------------------------------------------------------

_STRING_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", '"': '"', "'": "'", "n": "\n", "r": "\r", "t": "\t", "b": "\b", "f": "\f"}


def term_text(term: IriTerm | LiteralTerm) -> str:
    if isinstance(term, IriTerm):
        return f"<{term.iri}>"
    lexical = "".join(_STRING_ESCAPES.get(c, c) for c in term.lexical)
    return f'"{lexical}"^^<{_DATATYPE_IRIS[term.datatype]}>'


def triple_line(t: KbTriple) -> str:
    return f"{term_text(t.subject)} {term_text(t.predicate)} {term_text(t.object)} ."


def serialize_ntriples(kb: KnowledgeBase) -> bytes:
    """Canonical byte form: one triple per line, sorted by the textual
    (subject, predicate, object), LF endings. An empty graph serializes to
    an empty byte string."""
    lines = sorted(
        (term_text(t.subject), term_text(t.predicate), term_text(t.object)) for t in kb.triples
    )
    return "".join(f"{s} {p} {o} .\n" for s, p, o in lines).encode("utf-8")


def parse_ntriples(data: bytes, namespace: str | None = None) -> KnowledgeBase:
    """Parse a triples file back into a knowledge base.

    Accepts the constructs the model represents: IRI subjects/predicates,
    IRI or typed-literal objects with string or integer datatypes, blank
    lines and ``#`` comment lines. Anything else (blank nodes, language
    tags, other datatypes) raises NtSyntaxError with its line number.

    When no namespace is given it is inferred from the graph: the prefix of
    a declared class, else of the lexically first IRI, up to its final
    '#', '/' or ':'.
    """
    triples: set[KbTriple] = set()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise NtSyntaxError(f"not UTF-8: {exc}", line=0) from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        triples.add(_parse_triple_line(stripped, lineno))
    ns = namespace if namespace is not None else _infer_namespace(triples)
    return KnowledgeBase(frozenset(triples), ns)


def _parse_triple_line(line: str, lineno: int) -> KbTriple:
    pos = 0

    def skip_ws():
        nonlocal pos
        while pos < len(line) and line[pos] in " \t":
            pos += 1

    def parse_term(allow_literal: bool):
        nonlocal pos
        if pos >= len(line):
            raise NtSyntaxError("unexpected end of line", lineno)
        c = line[pos]
        if c == "<":
            end = line.find(">", pos)
            if end < 0:
                raise NtSyntaxError("unterminated IRI", lineno)
            iri = _unescape(line[pos + 1 : end], lineno)
            pos = end + 1
            try:
                return IriTerm(iri)
            except IriError as exc:
                raise NtSyntaxError(str(exc), lineno) from exc
        if c == '"':
            if not allow_literal:
                raise NtSyntaxError("literal not allowed here", lineno)
            lexical, pos = _parse_quoted(line, pos, lineno)
            if pos < len(line) and line[pos] == "@":
                raise NtSyntaxError("language tags are not supported", lineno)
            datatype = "string"
            if line.startswith("^^", pos):
                pos += 2
                if pos >= len(line) or line[pos] != "<":
                    raise NtSyntaxError("expected datatype IRI after ^^", lineno)
                end = line.find(">", pos)
                if end < 0:
                    raise NtSyntaxError("unterminated datatype IRI", lineno)
                datatype_iri = line[pos + 1 : end]
                pos = end + 1
                if datatype_iri not in _DATATYPES:
                    raise NtSyntaxError(f"unsupported datatype <{datatype_iri}>", lineno)
                datatype = _DATATYPES[datatype_iri]
            try:
                return LiteralTerm(lexical, datatype)
            except ValueError as exc:
                raise NtSyntaxError(str(exc), lineno) from exc
        if c == "_":
            raise NtSyntaxError("blank nodes are not supported", lineno)
        raise NtSyntaxError(f"unexpected character {c!r}", lineno)

    subject = parse_term(allow_literal=False)
    skip_ws()
    predicate = parse_term(allow_literal=False)
    skip_ws()
    obj = parse_term(allow_literal=True)
    skip_ws()
    if pos >= len(line) or line[pos] != ".":
        raise NtSyntaxError("expected '.' after object", lineno)
    pos += 1
    skip_ws()
    if pos < len(line) and not line[pos:].lstrip().startswith("#"):
        raise NtSyntaxError("trailing content after '.'", lineno)
    return KbTriple(subject, predicate, obj)


def _parse_quoted(line: str, pos: int, lineno: int) -> tuple[str, int]:
    # pos points at the opening quote
    out = []
    i = pos + 1
    while i < len(line):
        c = line[i]
        if c == '"':
            return "".join(out), i + 1
        if c == "\\":
            if i + 1 >= len(line):
                break
            nxt = line[i + 1]
            if nxt in _UNESCAPES:
                out.append(_UNESCAPES[nxt])
                i += 2
                continue
            if nxt in ("u", "U"):
                width = 4 if nxt == "u" else 8
                hex_digits = line[i + 2 : i + 2 + width]
                try:
                    out.append(chr(int(hex_digits, 16)))
                except ValueError:
                    raise NtSyntaxError(f"bad \\{nxt} escape", lineno) from None
                i += 2 + width
                continue
            raise NtSyntaxError(f"bad escape \\{nxt}", lineno)
        out.append(c)
        i += 1
    raise NtSyntaxError("unterminated string literal", lineno)


def _unescape(text: str, lineno: int) -> str:
    if "\\" not in text:
        return text
    out = []
    i = 0
    while i < len(text):
        if text[i] == "\\":
            nxt = text[i + 1] if i + 1 < len(text) else ""
            if nxt in ("u", "U"):
                width = 4 if nxt == "u" else 8
                try:
                    out.append(chr(int(text[i + 2 : i + 2 + width], 16)))
                except ValueError:
                    raise NtSyntaxError("bad IRI escape", lineno) from None
                i += 2 + width
                continue
            raise NtSyntaxError("bad IRI escape", lineno)
        out.append(text[i])
        i += 1
    return "".join(out)


def _infer_namespace(triples: set[KbTriple]) -> str:
    class_subjects = sorted(
        t.subject.iri
        for t in triples
        if t.predicate.iri == RDF_TYPE and isinstance(t.object, IriTerm) and t.object.iri == UCAT_CLASS
    )
    candidates = class_subjects or sorted(
        t.subject.iri for t in triples if not t.subject.iri.startswith(UCAT_NS)
    )
    for iri in candidates:
        cut = max(iri.rfind("#"), iri.rfind("/"), iri.rfind(":"))
        if cut >= 0:
            return iri[: cut + 1]
    return ""


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------


def _dot_label(kb: KnowledgeBase, iri: str) -> str:
    if kb.namespace and iri.startswith(kb.namespace):
        return unquote(iri[len(kb.namespace) :])
    if iri.startswith(UCAT_NS):
        return iri[len(UCAT_NS) :]
    return iri


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_graph(kb: KnowledgeBase, include_provenance: bool = False) -> bytes:
    """Render the knowledge base as a DOT digraph.

    Instance nodes are ellipses labeled by local name, extracted assertions
    are labeled solid edges, type assertions are dashed edges to box-shaped
    type nodes. Statement provenance nodes are omitted unless requested;
    when included each carries its three role edges.
    """
    assertions = sorted(
        (t.subject.iri, t.predicate.iri, t.object.iri)
        for t in domain_assertions(kb)
        if isinstance(t.object, IriTerm)
    )
    typings = sorted(
        (t.subject.iri, t.object.iri)
        for t in kb.triples
        if t.predicate.iri == RDF_TYPE
        and isinstance(t.object, IriTerm)
        and not t.object.iri.startswith(UCAT_NS)
    )
    instances = sorted({s for s, _, _ in assertions} | {o for _, _, o in assertions} | {s for s, _ in typings})
    type_nodes = sorted({o for _, o in typings})

    lines = ["digraph kb {", "  rankdir=LR;"]
    for iri in instances:
        lines.append(f"  {_dot_quote(_dot_label(kb, iri))} [shape=ellipse];")
    for iri in type_nodes:
        lines.append(f"  {_dot_quote(_dot_label(kb, iri))} [shape=box];")
    for s, p, o in assertions:
        lines.append(
            f"  {_dot_quote(_dot_label(kb, s))} -> {_dot_quote(_dot_label(kb, o))}"
            f" [label={_dot_quote(_dot_label(kb, p))}];"
        )
    for s, o in typings:
        lines.append(f"  {_dot_quote(_dot_label(kb, s))} -> {_dot_quote(_dot_label(kb, o))} [style=dashed];")

    if include_provenance:
        statement_nodes = sorted(
            t.subject.iri
            for t in kb.triples
            if t.predicate.iri == RDF_TYPE and isinstance(t.object, IriTerm) and t.object.iri == UCAT_STATEMENT
        )
        role_predicates = {UCAT_HAS_SUBJECT, UCAT_HAS_PREDICATE, UCAT_HAS_OBJECT}
        role_edges = sorted(
            (t.subject.iri, t.predicate.iri, t.object.iri)
            for t in kb.triples
            if t.predicate.iri in role_predicates and isinstance(t.object, IriTerm)
        )
        for iri in statement_nodes:
            lines.append(f"  {_dot_quote(_dot_label(kb, iri))} [shape=note];")
        for s, p, o in role_edges:
            lines.append(
                f"  {_dot_quote(_dot_label(kb, s))} -> {_dot_quote(_dot_label(kb, o))}"
                f" [label={_dot_quote(_dot_label(kb, p))}, style=dotted];"
            )

    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")
