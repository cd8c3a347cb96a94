"""Exception hierarchy shared across docsieve modules."""

from __future__ import annotations


class DocsieveError(Exception):
    """Base class for all docsieve-specific errors."""


# --- corpus ---------------------------------------------------------------

class MalformedLine(DocsieveError):
    def __init__(self, line_no: int, detail: str = ""):
        self.line_no = line_no
        self.detail = detail
        super().__init__(f"malformed corpus line {line_no}: {detail}")


class DuplicateDocId(DocsieveError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"duplicate doc_id: {doc_id!r}")


class KTooLarge(DocsieveError):
    def __init__(self, k: int, n: int):
        self.k = k
        self.n = n
        super().__init__(f"k={k} exceeds corpus size {n}")


# --- schema ---------------------------------------------------------------

class SchemaParseError(DocsieveError):
    """Raised when a schema JSON document cannot be decoded; carries a JSON pointer."""

    def __init__(self, pointer: str, detail: str):
        self.pointer = pointer
        self.detail = detail
        super().__init__(f"schema parse error at {pointer}: {detail}")


# --- induction ------------------------------------------------------------

class EmptyPool(DocsieveError):
    pass


class WeightsInvalid(DocsieveError):
    pass


class NoSemFields(DocsieveError):
    pass


class DegenerateSample(DocsieveError):
    pass


class NoFeasibleSchema(DocsieveError):
    """No genome satisfied all optimization constraints.

    ``breakdown`` maps constraint name -> number of genomes violating it,
    so callers can report which constraint dominated the failures.
    """

    def __init__(self, breakdown: dict[str, int]):
        self.breakdown = breakdown
        detail = ", ".join(f"{k}={v}" for k, v in sorted(breakdown.items()))
        super().__init__(f"no feasible schema found ({detail})")


# --- annotation -----------------------------------------------------------

class AnnotatorError(DocsieveError):
    pass


class ExtractorMissing(AnnotatorError):
    def __init__(self, field: str):
        self.field = field
        super().__init__(f"no extractor resolvable for field {field!r}")


class ExternalAnnotatorError(AnnotatorError):
    pass


class ProtocolError(ExternalAnnotatorError):
    def __init__(self, detail: str, line: str | None = None):
        self.line = line
        super().__init__(detail if line is None else f"{detail}: {line!r}")


class AnnotatorTimeout(ExternalAnnotatorError):
    pass


class VersionMismatch(ExternalAnnotatorError):
    pass


# --- store ----------------------------------------------------------------

class BuildError(DocsieveError):
    pass


class SchemaMismatch(BuildError):
    pass


class MultiValueFastField(BuildError):
    def __init__(self, field: str, doc_id: str):
        self.field = field
        self.doc_id = doc_id
        super().__init__(f"fast field {field!r} has multiple values in doc {doc_id!r}")


class MissingDocument(BuildError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"doc_id {doc_id!r} not present in corpus")


class EmptyBatch(BuildError):
    pass


class UnknownColumn(DocsieveError):
    pass


class UnknownField(DocsieveError):
    pass


class StoreTypeError(DocsieveError):
    """A predicate value does not parse as the column's declared type."""


class CorruptStore(DocsieveError):
    def __init__(self, detail: str, file: str = "", offset: int = -1):
        self.file = file
        self.offset = offset
        where = f" ({file}@{offset})" if file else ""
        super().__init__(f"corrupt store: {detail}{where}")


# --- query ----------------------------------------------------------------

class QuerySyntaxError(DocsieveError):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        msg = f"syntax error at {line}:{col}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)


class QuerySemanticError(DocsieveError):
    pass


class UnknownTempTable(QuerySemanticError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown temp table {name!r}")


class ExecutionError(DocsieveError):
    def __init__(self, doc_id: str, detail: str = ""):
        self.doc_id = doc_id
        super().__init__(f"execution failed for doc {doc_id!r}: {detail}")


# --- evaluation -----------------------------------------------------------

class ColumnMismatch(DocsieveError):
    pass
