"""rusforge: controlled-language use-case scenarios, formalized.

Parse scenario statements against an extensible template grammar, extract
subject-predicate-object triples, assign entity types, generate a
provenance-carrying knowledge base, and answer graph-pattern queries over
it. Ships a CLI (``rusforge``) and an HTTP service for the interactive
editor.
"""

from .document import (
    Actor,
    AltScenario,
    Glossary,
    GlossaryEntry,
    Project,
    Scenario,
    Step,
    StepRef,
    UseCase,
    ValidationReport,
    load_project,
    save_project,
    validate_project,
)
from .errors import (
    IriError,
    LexError,
    NtSyntaxError,
    QuerySyntaxError,
    QueryUnboundError,
    RusforgeError,
    SchemaError,
    TemplateError,
    UntypedError,
    UnvalidatedError,
    VersionError,
)
from .extraction import (
    Entity,
    ExtractionReport,
    GlossaryWarning,
    Occurrence,
    PredicateTerm,
    TypedReport,
    assign_types,
    check_glossary,
    extract,
)
from .kb import (
    IriTerm,
    KbTriple,
    KnowledgeBase,
    LiteralTerm,
    build_kb,
    domain_assertions,
    export_graph,
    parse_ntriples,
    serialize_ntriples,
)
from .query import SelectQuery, TriplePattern, Var, evaluate, parse_query
from .templates import (
    MatchResult,
    RawTriple,
    Template,
    TemplateSet,
    Token,
    match_against_set,
    match_statement,
    parse_template,
    parse_template_file,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "Actor",
    "AltScenario",
    "Entity",
    "ExtractionReport",
    "Glossary",
    "GlossaryEntry",
    "GlossaryWarning",
    "IriError",
    "IriTerm",
    "KbTriple",
    "KnowledgeBase",
    "LexError",
    "LiteralTerm",
    "MatchResult",
    "NtSyntaxError",
    "Occurrence",
    "PredicateTerm",
    "Project",
    "QuerySyntaxError",
    "QueryUnboundError",
    "RawTriple",
    "RusforgeError",
    "Scenario",
    "SchemaError",
    "SelectQuery",
    "Step",
    "StepRef",
    "Template",
    "TemplateError",
    "TemplateSet",
    "Token",
    "TriplePattern",
    "TypedReport",
    "UntypedError",
    "UnvalidatedError",
    "UseCase",
    "ValidationReport",
    "Var",
    "VersionError",
    "assign_types",
    "build_kb",
    "check_glossary",
    "domain_assertions",
    "evaluate",
    "export_graph",
    "extract",
    "load_project",
    "match_against_set",
    "match_statement",
    "parse_ntriples",
    "parse_query",
    "parse_template",
    "parse_template_file",
    "save_project",
    "serialize_ntriples",
    "tokenize",
    "validate_project",
]
