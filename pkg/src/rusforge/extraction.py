"""Entity and predicate extraction from validated projects.

Collects every subject and object as an entity and every predicate as a
predicate term, each with full per-triple provenance (where in the project it
occurred). Entities must be assigned a type before knowledge-base generation;
the glossary check flags terms outside the project's controlled vocabulary
without blocking anything.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

from .document import Glossary, Project, project_triples, save_project
from .errors import UntypedError, UnvalidatedError
from .templates import WORD_RE


@dataclass(frozen=True)
class Occurrence:
    actor: str
    use_case: str
    scenario: str  # "main" | "alt<j>"
    step: int
    role: str  # "subject" | "predicate" | "object"


@dataclass(frozen=True)
class Entity:
    lexeme: str
    roles: frozenset[str]  # subset of {"subject", "object"}
    occurrences: tuple[Occurrence, ...]
    assigned_type: str | None = None


@dataclass(frozen=True)
class PredicateTerm:
    lexeme: str
    occurrences: tuple[Occurrence, ...]


@dataclass(frozen=True)
class ExtractionReport:
    entities: tuple[Entity, ...]  # sorted by lexeme
    predicates: tuple[PredicateTerm, ...]  # sorted by lexeme
    source_hash: str  # sha256 of the canonical project document


@dataclass(frozen=True)
class TypedReport:
    """An extraction report in which every entity carries a type."""

    entities: tuple[Entity, ...]
    predicates: tuple[PredicateTerm, ...]
    source_hash: str

    def types(self) -> dict[str, str]:
        return {e.lexeme: e.assigned_type for e in self.entities}


@dataclass(frozen=True)
class GlossaryWarning:
    term: str
    occurrences: tuple[Occurrence, ...]
    code: str = "W_UNKNOWN_TERM"


def extract(project: Project) -> ExtractionReport:
    """Build the intermediary representation of a validated project.

    Raises UnvalidatedError if any step lacks a match result. Entities and
    predicates are sorted by lexeme; occurrence lists follow document order,
    one entry per triple position (a step expanding to k triples contributes
    k subject occurrences).
    """
    unmatched = []
    for actor in project.actors:
        for uc in actor.use_cases:
            scenarios = [("main", uc.main)] + [
                (f"alt{j}", alt.steps) for j, alt in enumerate(uc.alternatives, start=1)
            ]
            for scen_name, scenario in scenarios:
                for step in scenario.steps:
                    if step.match is None:
                        unmatched.append(f"{actor.name}/{uc.id}/{scen_name}:{step.index}")
    if unmatched:
        raise UnvalidatedError(
            "project has unmatched steps: " + ", ".join(unmatched), steps=tuple(unmatched)
        )

    entities: dict[str, dict] = {}
    predicates: dict[str, list[Occurrence]] = {}

    def record_entity(lexeme: str, role: str, occ: Occurrence):
        slot = entities.setdefault(lexeme, {"roles": set(), "occurrences": []})
        slot["roles"].add(role)
        slot["occurrences"].append(occ)

    for ref, _side, _k, triple in project_triples(project):
        record_entity(triple.subject, "subject", Occurrence(ref.actor, ref.use_case, ref.scenario, ref.step, "subject"))
        predicates.setdefault(triple.predicate, []).append(
            Occurrence(ref.actor, ref.use_case, ref.scenario, ref.step, "predicate")
        )
        record_entity(triple.object, "object", Occurrence(ref.actor, ref.use_case, ref.scenario, ref.step, "object"))

    return ExtractionReport(
        entities=tuple(
            Entity(lexeme, frozenset(slot["roles"]), tuple(slot["occurrences"]))
            for lexeme, slot in sorted(entities.items())
        ),
        predicates=tuple(
            PredicateTerm(lexeme, tuple(occs)) for lexeme, occs in sorted(predicates.items())
        ),
        source_hash=hashlib.sha256(save_project(project)).hexdigest(),
    )


def check_glossary(report: ExtractionReport, glossary: Glossary) -> list[GlossaryWarning]:
    """One warning per extracted term absent from the glossary.

    Warnings never block knowledge-base generation; an empty glossary flags
    every term.
    """
    known = glossary.terms()
    warnings = []
    for entity in report.entities:
        if entity.lexeme not in known:
            warnings.append(GlossaryWarning(entity.lexeme, entity.occurrences))
    for predicate in report.predicates:
        if predicate.lexeme not in known:
            warnings.append(GlossaryWarning(predicate.lexeme, predicate.occurrences))
    return warnings


def assign_types(
    report: ExtractionReport,
    assignment: dict[str, str],
    default_type: str | None = None,
) -> TypedReport:
    """Type every entity from the assignment map, falling back to
    default_type when given.

    Raises UntypedError listing every unassigned entity when no default is
    provided. Assignment keys that name no extracted entity are ignored.
    """
    if default_type is not None and not WORD_RE.fullmatch(default_type):
        raise ValueError(f"default type {default_type!r} is not a word")
    missing = sorted(
        e.lexeme for e in report.entities if assignment.get(e.lexeme) is None
    )
    if missing and default_type is None:
        raise UntypedError(missing)
    return TypedReport(
        entities=tuple(
            replace(e, assigned_type=assignment.get(e.lexeme, default_type))
            for e in report.entities
        ),
        predicates=report.predicates,
        source_hash=report.source_hash,
    )


def report_to_dict(report: ExtractionReport | TypedReport, warnings: list[GlossaryWarning] | None = None) -> dict:
    """JSON-ready form of a report: entities and predicates with lexeme,
    roles, occurrences and type."""
    def occ(o: Occurrence) -> dict:
        return {
            "actor": o.actor,
            "use_case": o.use_case,
            "scenario": o.scenario,
            "step": o.step,
            "role": o.role,
        }

    doc = {
        "entities": [
            {
                "lexeme": e.lexeme,
                "roles": sorted(e.roles),
                "occurrences": [occ(o) for o in e.occurrences],
                "type": e.assigned_type,
            }
            for e in report.entities
        ],
        "predicates": [
            {
                "lexeme": p.lexeme,
                "roles": ["predicate"],
                "occurrences": [occ(o) for o in p.occurrences],
                "type": None,
            }
            for p in report.predicates
        ],
        "source_hash": report.source_hash,
    }
    if warnings is not None:
        doc["warnings"] = [
            {"code": w.code, "term": w.term, "occurrences": [occ(o) for o in w.occurrences]}
            for w in warnings
        ]
    return doc


def report_to_json(report: ExtractionReport | TypedReport, warnings: list[GlossaryWarning] | None = None) -> bytes:
    doc = report_to_dict(report, warnings)
    return (json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")
