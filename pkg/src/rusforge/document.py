"""Projects, actors, use cases and tabular scenarios.

A project bundles the template set, the configurable determiner list, a
glossary of domain terms, entity type assignments and a tree of actors, use
cases and scenarios. Scenario steps are two-column table rows: each step is
either a user input or a system response. Validation matches every step
against the template set and reports, per step, the extracted triples or a
diagnostic.

Projects are values. Validation does not mutate its input; it returns a
report carrying a copy of the project whose steps have their match results
filled in.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from typing import Any
from urllib.parse import quote

from .errors import LexError, SchemaError, VersionError
from .templates import (
    DEFAULT_DETERMINERS,
    MatchResult,
    RawTriple,
    Template,
    TemplateSet,
    WORD_RE,
    match_against_set,
    parse_template_line,
)

FORMAT_VERSION = 1

SIDES = ("user", "system")

# IRI prefix: scheme, then any run of non-space non-bracket characters,
# ending in a separator that local names can be appended to.
NAMESPACE_RE = re.compile(r"[A-Za-z][A-Za-z0-9+.-]*:[^\s<>\"{}|^`\\]*[:/#]")


def default_namespace(name: str) -> str:
    return f"urn:ucat:proj:{quote(name, safe='')}#"


@dataclass(frozen=True)
class GlossaryEntry:
    term: str
    suggested_type: str | None = None


@dataclass(frozen=True)
class Glossary:
    entries: tuple[GlossaryEntry, ...] = ()

    def __post_init__(self):
        terms = [e.term for e in self.entries]
        if len(set(terms)) != len(terms):
            raise ValueError("glossary terms must be unique")
        object.__setattr__(self, "entries", tuple(sorted(self.entries, key=lambda e: e.term)))

    def terms(self) -> frozenset[str]:
        return frozenset(e.term for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Step:
    index: int
    side: str  # "user" | "system"
    text: str
    match: MatchResult | None = None


@dataclass(frozen=True)
class Scenario:
    steps: tuple[Step, ...]

    def __post_init__(self):
        indices = [s.index for s in self.steps]
        if indices != list(range(1, len(indices) + 1)):
            raise ValueError(f"step indices must be 1..{len(indices)} contiguous, got {indices}")


@dataclass(frozen=True)
class AltScenario:
    branch_step: int
    label: str
    steps: Scenario


@dataclass(frozen=True)
class UseCase:
    id: str
    title: str
    main: Scenario
    alternatives: tuple[AltScenario, ...] = ()

    def __post_init__(self):
        if not self.main.steps:
            raise ValueError(f"use case {self.id!r} has an empty main scenario")
        for alt in self.alternatives:
            if not 1 <= alt.branch_step <= len(self.main.steps):
                raise ValueError(
                    f"use case {self.id!r}: branch_step {alt.branch_step} outside 1..{len(self.main.steps)}"
                )


@dataclass(frozen=True)
class Actor:
    name: str
    use_cases: tuple[UseCase, ...] = ()

    def __post_init__(self):
        ids = [uc.id for uc in self.use_cases]
        if len(set(ids)) != len(ids):
            raise ValueError(f"actor {self.name!r} has duplicate use case ids")
        object.__setattr__(self, "use_cases", tuple(sorted(self.use_cases, key=lambda u: u.id)))


@dataclass(frozen=True)
class Project:
    name: str
    template_set: TemplateSet
    actors: tuple[Actor, ...] = ()
    namespace: str = ""
    determiners: frozenset[str] = DEFAULT_DETERMINERS
    glossary: Glossary = field(default_factory=Glossary)
    type_assignments: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.namespace:
            object.__setattr__(self, "namespace", default_namespace(self.name))
        if not NAMESPACE_RE.fullmatch(self.namespace):
            raise ValueError(f"namespace {self.namespace!r} is not an IRI prefix ending in ':', '/' or '#'")
        names = [a.name for a in self.actors]
        if len(set(names)) != len(names):
            raise ValueError("actor names must be unique")
        object.__setattr__(self, "actors", tuple(sorted(self.actors, key=lambda a: a.name)))


@dataclass(frozen=True)
class StepRef:
    actor: str
    use_case: str
    scenario: str  # "main" | "alt<j>"
    step: int


@dataclass(frozen=True)
class StepVerdict:
    ref: StepRef
    side: str
    text: str
    match: MatchResult | None
    reason: str | None = None  # "no_match" | "lex_error" when match is None
    column: int | None = None  # set for lex_error

    @property
    def ok(self) -> bool:
        return self.match is not None


@dataclass(frozen=True)
class SideMismatchWarning:
    """Lint: a user step whose subject is "system", or the reverse."""

    ref: StepRef
    side: str
    subject: str
    code: str = "W_SIDE_SUBJECT"


@dataclass(frozen=True)
class ValidationReport:
    project: Project  # steps carry their match results
    entries: tuple[StepVerdict, ...]
    warnings: tuple[SideMismatchWarning, ...] = ()

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    def diagnostics(self) -> tuple[StepVerdict, ...]:
        return tuple(e for e in self.entries if not e.ok)


def validate_project(project: Project) -> ValidationReport:
    """Match every step (main and alternative scenarios) against the
    project's template set.

    Lexical errors in a step become diagnostics, not exceptions. The
    returned report is a pure function of the project; re-validating an
    already annotated project yields an identical report.
    """
    entries: list[StepVerdict] = []
    warnings: list[SideMismatchWarning] = []
    actors: list[Actor] = []
    for actor in project.actors:
        use_cases = []
        for uc in actor.use_cases:
            scenarios = [("main", uc.main)] + [
                (f"alt{j}", alt.steps) for j, alt in enumerate(uc.alternatives, start=1)
            ]
            annotated: dict[str, Scenario] = {}
            for scen_name, scenario in scenarios:
                steps = []
                for step in scenario.steps:
                    ref = StepRef(actor.name, uc.id, scen_name, step.index)
                    try:
                        result = match_against_set(step.text, project.template_set, project.determiners)
                    except LexError as exc:
                        entries.append(StepVerdict(ref, step.side, step.text, None, "lex_error", exc.column))
                        steps.append(replace(step, match=None))
                        continue
                    if result is None:
                        entries.append(StepVerdict(ref, step.side, step.text, None, "no_match"))
                    else:
                        entries.append(StepVerdict(ref, step.side, step.text, result))
                        subject = result.triples[0].subject
                        if (step.side == "user" and subject == "system") or (
                            step.side == "system" and subject == "user"
                        ):
                            warnings.append(SideMismatchWarning(ref, step.side, subject))
                    steps.append(replace(step, match=result))
                annotated[scen_name] = Scenario(tuple(steps))
            use_cases.append(
                UseCase(
                    uc.id,
                    uc.title,
                    annotated["main"],
                    tuple(
                        AltScenario(alt.branch_step, alt.label, annotated[f"alt{j}"])
                        for j, alt in enumerate(uc.alternatives, start=1)
                    ),
                )
            )
        actors.append(Actor(actor.name, tuple(use_cases)))
    annotated_project = replace(project, actors=tuple(actors))
    return ValidationReport(annotated_project, tuple(entries), tuple(warnings))


# ---------------------------------------------------------------------------
# Project file schema (JSON, canonicalized on save)
# ---------------------------------------------------------------------------

_TOP_KEYS = {
    "rusforge_version",
    "name",
    "namespace",
    "templates",
    "determiners",
    "glossary",
    "type_assignments",
    "actors",
}


def load_project(data: bytes) -> Project:
    """Parse a project document. Raises SchemaError with the path of the
    offending field, or VersionError for an unknown format version."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"not a UTF-8 JSON document: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    version = doc.get("rusforge_version")
    if version != FORMAT_VERSION:
        raise VersionError(f"unknown format version {version!r} (expected {FORMAT_VERSION})")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise SchemaError("unknown key", path=f"$.{sorted(unknown)[0]}")

    name = _expect(doc, "name", str, "$")
    if not name:
        raise SchemaError("must be non-empty", path="$.name")
    namespace = doc.get("namespace", default_namespace(name))
    if not isinstance(namespace, str):
        raise SchemaError("must be a string", path="$.namespace")

    template_lines = _expect(doc, "templates", list, "$")
    templates = []
    for i, line in enumerate(template_lines):
        if not isinstance(line, str):
            raise SchemaError("must be a string", path=f"$.templates[{i}]")
        try:
            templates.append(parse_template_line(line, default_id=f"t{i + 1}"))
        except Exception as exc:
            raise SchemaError(str(exc), path=f"$.templates[{i}]") from exc

    determiners = doc.get("determiners", sorted(DEFAULT_DETERMINERS))
    if not isinstance(determiners, list) or not all(isinstance(d, str) for d in determiners):
        raise SchemaError("must be a list of words", path="$.determiners")

    glossary_entries = []
    for i, entry in enumerate(doc.get("glossary", [])):
        path = f"$.glossary[{i}]"
        if not isinstance(entry, dict) or "term" not in entry:
            raise SchemaError("must be an object with a 'term' key", path=path)
        term = entry["term"]
        if not isinstance(term, str) or not WORD_RE.fullmatch(term):
            raise SchemaError(f"term {term!r} is not a word", path=path)
        suggested = entry.get("type")
        if suggested is not None and (not isinstance(suggested, str) or not WORD_RE.fullmatch(suggested)):
            raise SchemaError(f"type {suggested!r} is not a word", path=path)
        glossary_entries.append(GlossaryEntry(term, suggested))

    assignments = doc.get("type_assignments", {})
    if not isinstance(assignments, dict):
        raise SchemaError("must be an object", path="$.type_assignments")
    for entity, type_name in assignments.items():
        if not isinstance(type_name, str) or not WORD_RE.fullmatch(type_name):
            raise SchemaError(f"type {type_name!r} is not a word", path=f"$.type_assignments.{entity}")

    actors = []
    for i, actor_doc in enumerate(doc.get("actors", [])):
        actors.append(_load_actor(actor_doc, f"$.actors[{i}]"))

    try:
        return Project(
            name=name,
            namespace=namespace,
            template_set=TemplateSet(tuple(templates)),
            determiners=frozenset(determiners),
            glossary=Glossary(tuple(glossary_entries)),
            type_assignments=dict(assignments),
            actors=tuple(actors),
        )
    except SchemaError:
        raise
    except Exception as exc:
        raise SchemaError(str(exc)) from exc


def _load_actor(doc: Any, path: str) -> Actor:
    if not isinstance(doc, dict):
        raise SchemaError("must be an object", path=path)
    name = _expect(doc, "name", str, path)
    if not WORD_RE.fullmatch(name):
        raise SchemaError(f"actor name {name!r} is not a word", path=f"{path}.name")
    use_cases = []
    for i, uc_doc in enumerate(doc.get("use_cases", [])):
        use_cases.append(_load_use_case(uc_doc, f"{path}.use_cases[{i}]"))
    try:
        return Actor(name, tuple(use_cases))
    except ValueError as exc:
        raise SchemaError(str(exc), path=path) from exc


def _load_use_case(doc: Any, path: str) -> UseCase:
    if not isinstance(doc, dict):
        raise SchemaError("must be an object", path=path)
    uc_id = _expect(doc, "id", str, path)
    if not uc_id:
        raise SchemaError("must be non-empty", path=f"{path}.id")
    title = doc.get("title", "")
    if not isinstance(title, str):
        raise SchemaError("must be a string", path=f"{path}.title")
    main = _load_scenario(_expect(doc, "main", list, path), f"{path}.main")
    alternatives = []
    for j, alt_doc in enumerate(doc.get("alternatives", [])):
        alt_path = f"{path}.alternatives[{j}]"
        if not isinstance(alt_doc, dict):
            raise SchemaError("must be an object", path=alt_path)
        branch_step = _expect(alt_doc, "branch_step", int, alt_path)
        label = alt_doc.get("label", "")
        if not isinstance(label, str):
            raise SchemaError("must be a string", path=f"{alt_path}.label")
        steps = _load_scenario(_expect(alt_doc, "steps", list, alt_path), f"{alt_path}.steps")
        if not 1 <= branch_step <= len(main.steps):
            raise SchemaError(
                f"branch_step {branch_step} outside 1..{len(main.steps)}",
                path=f"{alt_path}.branch_step",
            )
        alternatives.append(AltScenario(branch_step, label, steps))
    try:
        return UseCase(uc_id, title, main, tuple(alternatives))
    except ValueError as exc:
        raise SchemaError(str(exc), path=path) from exc


def _load_scenario(steps_doc: list, path: str) -> Scenario:
    steps = []
    for i, step_doc in enumerate(steps_doc):
        step_path = f"{path}[{i}]"
        if not isinstance(step_doc, dict):
            raise SchemaError("must be an object", path=step_path)
        index = _expect(step_doc, "index", int, step_path)
        side = _expect(step_doc, "side", str, step_path)
        if side not in SIDES:
            raise SchemaError(f"side must be one of {SIDES}, got {side!r}", path=f"{step_path}.side")
        text = _expect(step_doc, "text", str, step_path)
        steps.append(Step(index, side, text))
    steps.sort(key=lambda s: s.index)
    try:
        return Scenario(tuple(steps))
    except ValueError as exc:
        raise SchemaError(str(exc), path=path) from exc


def _expect(doc: dict, key: str, kind: type, path: str):
    if key not in doc:
        raise SchemaError(f"missing key {key!r}", path=path)
    value = doc[key]
    if kind is int and isinstance(value, bool):
        raise SchemaError(f"must be an integer, got {value!r}", path=f"{path}.{key}")
    if not isinstance(value, kind):
        raise SchemaError(f"must be {kind.__name__}, got {type(value).__name__}", path=f"{path}.{key}")
    return value


def save_project(project: Project) -> bytes:
    """Serialize a project to its canonical form: alphabetical keys, 2-space
    indentation, LF line endings, trailing newline. Match results are
    transient and never serialized."""
    doc = {
        "rusforge_version": FORMAT_VERSION,
        "name": project.name,
        "namespace": project.namespace,
        "templates": [_template_line(t, i) for i, t in enumerate(project.template_set.templates, start=1)],
        "determiners": sorted(project.determiners),
        "glossary": [
            {"term": e.term, **({"type": e.suggested_type} if e.suggested_type else {})}
            for e in project.glossary.entries
        ],
        "type_assignments": dict(sorted(project.type_assignments.items())),
        "actors": [
            {
                "name": actor.name,
                "use_cases": [
                    {
                        "id": uc.id,
                        "title": uc.title,
                        "main": [_step_doc(s) for s in uc.main.steps],
                        "alternatives": [
                            {
                                "branch_step": alt.branch_step,
                                "label": alt.label,
                                "steps": [_step_doc(s) for s in alt.steps.steps],
                            }
                            for alt in uc.alternatives
                        ],
                    }
                    for uc in actor.use_cases
                ],
            }
            for actor in project.actors
        ],
    }
    return (json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")


def _template_line(template: Template, position: int) -> str:
    if template.id == f"t{position}":
        return template.source
    return f"id:{template.id} {template.source}"


def _step_doc(step: Step) -> dict:
    return {"index": step.index, "side": step.side, "text": step.text}


def project_triples(project: Project) -> list[tuple[StepRef, str, int, RawTriple]]:
    """All (step ref, side, triple ordinal, triple) tuples of a validated
    project, in document order. Raises nothing; skips unmatched steps."""
    out = []
    for actor in project.actors:
        for uc in actor.use_cases:
            scenarios = [("main", uc.main)] + [
                (f"alt{j}", alt.steps) for j, alt in enumerate(uc.alternatives, start=1)
            ]
            for scen_name, scenario in scenarios:
                for step in scenario.steps:
                    if step.match is None:
                        continue
                    for k, triple in enumerate(step.match.triples, start=1):
                        out.append((StepRef(actor.name, uc.id, scen_name, step.index), step.side, k, triple))
    return out
