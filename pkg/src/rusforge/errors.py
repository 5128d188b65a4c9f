"""Error types shared across the package.

Every failure carries a stable machine-readable ``code`` attribute (an
``E_*`` string) so the CLI and HTTP layers can map errors to exit codes and
response payloads without matching on message text.
"""

from __future__ import annotations


class RusforgeError(Exception):
    """Base class for all package errors."""

    code = "E_INTERNAL"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class TemplateError(RusforgeError):
    """Malformed template definition.

    ``code`` is one of E_TPL_DUP_ROLE, E_TPL_NO_ROLE, E_TPL_BAD_REPEAT,
    E_TPL_BAD_TOKEN, E_TPL_ORDER, E_TPL_DUP_ID.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class LexError(RusforgeError):
    """Character outside the word/comma/whitespace grammar of a statement."""

    code = "E_LEX"

    def __init__(self, message: str, column: int):
        super().__init__(message)
        self.column = column  # 0-based offset into the statement


class SchemaError(RusforgeError):
    """Project document does not conform to the file schema."""

    code = "E_SCHEMA"

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class VersionError(RusforgeError):
    """Project document declares an unknown format version."""

    code = "E_VERSION"


class UnvalidatedError(RusforgeError):
    """Operation requires a fully validated project but some step is unmatched."""

    code = "E_UNVALIDATED"

    def __init__(self, message: str, steps: tuple = ()):
        super().__init__(message)
        self.steps = steps


class UntypedError(RusforgeError):
    """Knowledge-base generation requires a type for every entity."""

    code = "E_UNTYPED"

    def __init__(self, entities):
        entities = tuple(entities)
        super().__init__("untyped entities: " + ", ".join(entities))
        self.entities = entities


class IriError(RusforgeError):
    """Local name cannot be turned into an IRI."""

    code = "E_IRI"


class NtSyntaxError(RusforgeError):
    """Input is not a parseable triples file."""

    code = "E_NT_SYNTAX"

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line  # 1-based


class QuerySyntaxError(RusforgeError):
    """Query text does not conform to the SELECT subset grammar."""

    code = "E_Q_SYNTAX"

    def __init__(self, message: str, position: int):
        super().__init__(f"at offset {position}: {message}")
        self.position = position  # 0-based character offset


class QueryUnboundError(RusforgeError):
    """A projected variable does not occur in any pattern."""

    code = "E_Q_UNBOUND"

    def __init__(self, variables):
        variables = tuple(variables)
        super().__init__("projected but unbound: " + ", ".join(variables))
        self.variables = variables
