"""Template grammar and statement matching.

Statements are restricted word sequences such as ``user inserts the keyword,
search_criteria``. Templates define which statements are admissible and which
words land in the subject, predicate and object positions of the extracted
triples. A template is written as whitespace-separated items: ``<S>``, ``<P>``
and ``<O>`` are placeholders, ``<O>+`` is a repeatable object placeholder
(admitting comma-separated lists with an optional final ``and`` item), and any
other item is a literal word that must appear verbatim in the statement.

Matching tolerates at most one determiner (``a``, ``an``, ``the`` by default)
immediately before each placeholder-bound word, so ``user selects action``,
``user selects the action`` and ``user selects an action`` all yield the same
triple. Multi-word concepts must be underscore-joined by the author
(``work_plan``); no automatic joining is attempted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import LexError, TemplateError

WORD_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
PLACEHOLDER_RE = re.compile(r"<([SPOspo])>(\+?)")

DEFAULT_DETERMINERS = frozenset({"a", "an", "the"})
LIST_CONJUNCTION = "and"

ROLE_NAMES = {"s": "subject", "p": "predicate", "o": "object"}


@dataclass(frozen=True)
class Token:
    lexeme: str
    kind: str  # "word" | "comma"


@dataclass(frozen=True)
class Literal:
    word: str


@dataclass(frozen=True)
class Placeholder:
    role: str  # "subject" | "predicate" | "object"
    repeatable: bool = False

    def __post_init__(self):
        if self.repeatable and self.role != "object":
            raise TemplateError("E_TPL_BAD_REPEAT", f"{self.role} placeholders cannot repeat")


TemplateElement = Literal | Placeholder


@dataclass(frozen=True)
class Template:
    id: str
    elements: tuple[TemplateElement, ...]
    source: str

    @property
    def literal_count(self) -> int:
        return sum(1 for e in self.elements if isinstance(e, Literal))


@dataclass(frozen=True)
class TemplateSet:
    templates: tuple[Template, ...]

    def __post_init__(self):
        seen = set()
        for t in self.templates:
            if t.id in seen:
                raise TemplateError("E_TPL_DUP_ID", f"duplicate template id {t.id!r}")
            seen.add(t.id)

    def ordered(self) -> tuple[Template, ...]:
        """Templates in canonical matching order.

        Most-specific first: descending literal count, ties broken by
        declaration order. This keeps a catch-all ``<S> <P> <O>+`` from
        shadowing ``<S> <P> in the <O>``.
        """
        return tuple(sorted(self.templates, key=lambda t: -t.literal_count))


@dataclass(frozen=True)
class RawTriple:
    subject: str
    predicate: str
    object: str


@dataclass(frozen=True)
class MatchResult:
    template_id: str
    triples: tuple[RawTriple, ...]
    consumed: tuple[int, int]  # token span, always (0, len(tokens))


def tokenize(statement: str) -> list[Token]:
    """Split a statement into word and comma tokens.

    Words are lowercased; a comma attached to a word ("keyword,") becomes a
    separate comma token after it. Raises LexError with the 0-based column of
    the first character outside the word/comma/whitespace grammar.
    """
    tokens: list[Token] = []
    i, n = 0, len(statement)
    while i < n:
        c = statement[i]
        if c.isspace():
            i += 1
            continue
        if c == ",":
            tokens.append(Token(",", "comma"))
            i += 1
            continue
        if not ("a" <= c <= "z" or "A" <= c <= "Z"):
            raise LexError(f"unexpected character {c!r} at column {i}", column=i)
        j = i + 1
        while j < n and (
            "a" <= statement[j] <= "z"
            or "A" <= statement[j] <= "Z"
            or "0" <= statement[j] <= "9"
            or statement[j] == "_"
        ):
            j += 1
        tokens.append(Token(statement[i:j].lower(), "word"))
        i = j
    return tokens


def parse_template(source: str, template_id: str | None = None) -> Template:
    """Parse one template definition.

    Raises TemplateError with code E_TPL_BAD_TOKEN (item neither placeholder
    nor word), E_TPL_BAD_REPEAT (``+`` on a non-object or non-final
    placeholder, or more than one repeatable), E_TPL_DUP_ROLE (second subject
    or predicate), E_TPL_NO_ROLE (missing subject, predicate or object) or
    E_TPL_ORDER (subject/predicate/first object out of order).
    """
    items = source.split()
    elements: list[TemplateElement] = []
    for item in items:
        m = PLACEHOLDER_RE.fullmatch(item)
        if m:
            role = ROLE_NAMES[m.group(1).lower()]
            repeatable = m.group(2) == "+"
            if repeatable and role != "object":
                raise TemplateError(
                    "E_TPL_BAD_REPEAT", f"repetition is only allowed on <O>: {item!r}"
                )
            elements.append(Placeholder(role, repeatable))
        elif WORD_RE.fullmatch(item):
            elements.append(Literal(item.lower()))
        else:
            raise TemplateError(
                "E_TPL_BAD_TOKEN", f"item {item!r} is neither a placeholder nor a word"
            )

    subjects = [i for i, e in enumerate(elements) if isinstance(e, Placeholder) and e.role == "subject"]
    predicates = [i for i, e in enumerate(elements) if isinstance(e, Placeholder) and e.role == "predicate"]
    objects = [i for i, e in enumerate(elements) if isinstance(e, Placeholder) and e.role == "object"]
    if len(subjects) > 1 or len(predicates) > 1:
        raise TemplateError("E_TPL_DUP_ROLE", f"more than one <S> or <P> in {source!r}")
    if not subjects or not predicates or not objects:
        raise TemplateError("E_TPL_NO_ROLE", f"template {source!r} must contain <S>, <P> and at least one <O>")
    repeatable = [i for i in objects if elements[i].repeatable]
    if len(repeatable) > 1:
        raise TemplateError("E_TPL_BAD_REPEAT", f"more than one <O>+ in {source!r}")
    if repeatable and repeatable[0] != len(elements) - 1:
        raise TemplateError("E_TPL_BAD_REPEAT", f"<O>+ must be the final item of {source!r}")
    if not (subjects[0] < predicates[0] < objects[0]):
        raise TemplateError("E_TPL_ORDER", f"expected <S> before <P> before <O> in {source!r}")

    normalized = " ".join(items)
    return Template(template_id if template_id is not None else normalized, tuple(elements), source)


def parse_template_line(line: str, default_id: str) -> Template:
    """Parse a template line, honoring an optional ``id:NAME`` prefix."""
    stripped = line.strip()
    first, _, rest = stripped.partition(" ")
    if first.startswith("id:") and len(first) > 3:
        return parse_template(rest.strip(), template_id=first[3:])
    return parse_template(stripped, template_id=default_id)


def parse_template_file(text: str) -> TemplateSet:
    """Parse a template file: one template per line, ``#`` comments, blank
    lines ignored, ids default to ``t<line-number>``."""
    templates = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        templates.append(parse_template_line(stripped, default_id=f"t{lineno}"))
    return TemplateSet(tuple(templates))


def match_statement(
    tokens: list[Token],
    template: Template,
    determiners: frozenset[str] = DEFAULT_DETERMINERS,
) -> MatchResult | None:
    """Match a token stream against one template.

    The whole stream must be consumed; returns None (not an error) otherwise.
    Before each placeholder-bound word at most one determiner is skipped. A
    repeatable object binds ``det? word ("," det? word)* ("and" det? word)?``.

    Where several segmentations would consume the stream, the canonical one
    wins: choice points are resolved depth-first preferring, in order,
    consuming a determiner over binding it, and extending a repeatable list
    over closing it.
    """
    bound = _match_elements(tokens, template.elements, determiners)
    if bound is None:
        return None
    subject = predicate = None
    objects: list[str] = []
    for role, word in bound:
        if role == "subject":
            subject = word
        elif role == "predicate":
            predicate = word
        else:
            objects.append(word)
    triples = tuple(RawTriple(subject, predicate, o) for o in objects)
    return MatchResult(template.id, triples, (0, len(tokens)))


def match_against_set(
    statement: str,
    template_set: TemplateSet,
    determiners: frozenset[str] = DEFAULT_DETERMINERS,
) -> MatchResult | None:
    """Tokenize a statement and try templates in canonical order.

    Returns the first match, None if no template matches. LexError from
    tokenization propagates.
    """
    tokens = tokenize(statement)
    for template in template_set.ordered():
        result = match_statement(tokens, template, determiners)
        if result is not None:
            return result
    return None


def _match_elements(
    tokens: list[Token],
    elements: tuple[TemplateElement, ...],
    determiners: frozenset[str],
) -> list[tuple[str, str]] | None:
    """Return ordered (role, word) bindings, or None if no full match."""
    n = len(tokens)

    def is_det(ti: int) -> bool:
        return ti < n and tokens[ti].kind == "word" and tokens[ti].lexeme in determiners

    def is_word(ti: int) -> bool:
        return ti < n and tokens[ti].kind == "word"

    def walk(ei: int, ti: int) -> list[tuple[str, str]] | None:
        if ei == len(elements):
            return [] if ti == n else None
        el = elements[ei]
        if isinstance(el, Literal):
            if is_word(ti) and tokens[ti].lexeme == el.word:
                return walk(ei + 1, ti + 1)
            return None
        if not el.repeatable:
            # determiner-consuming branch first, then the bare word
            for start in _starts(ti, is_det):
                if is_word(start):
                    rest = walk(ei + 1, start + 1)
                    if rest is not None:
                        return [(el.role, tokens[start].lexeme)] + rest
            return None
        return walk_list(el, ei, ti)

    def walk_list(el: Placeholder, ei: int, ti: int) -> list[tuple[str, str]] | None:
        def after_item(ti: int, items: list[str]) -> list[tuple[str, str]] | None:
            if ti < n and tokens[ti].kind == "comma":
                for start in _starts(ti + 1, is_det):
                    if is_word(start):
                        result = after_item(start + 1, items + [tokens[start].lexeme])
                        if result is not None:
                            return result
            elif is_word(ti) and tokens[ti].lexeme == LIST_CONJUNCTION:
                for start in _starts(ti + 1, is_det):
                    if is_word(start):
                        rest = walk(ei + 1, start + 1)
                        if rest is not None:
                            return _bindings(el, items + [tokens[start].lexeme]) + rest
            rest = walk(ei + 1, ti)
            if rest is not None:
                return _bindings(el, items) + rest
            return None

        for start in _starts(ti, is_det):
            if is_word(start):
                result = after_item(start + 1, [tokens[start].lexeme])
                if result is not None:
                    return result
        return None

    def _bindings(el: Placeholder, items: list[str]) -> list[tuple[str, str]]:
        return [(el.role, w) for w in items]

    return walk(0, 0)


def _starts(ti: int, is_det) -> tuple[int, ...]:
    """Word positions to try for a placeholder at ti: past a determiner
    first, then ti itself."""
    return (ti + 1, ti) if is_det(ti) else (ti,)
