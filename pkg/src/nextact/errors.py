"""Exception types raised by the package.

Everything data-related derives from NextactError so callers (and the CLI)
can distinguish bad input from genuine bugs.
"""


class NextactError(Exception):
    """Base class for all data and validation errors in this package."""


class CycleDetected(NextactError):
    """The taxonomy edge set contains a cycle or has no root."""


class EmptyInput(NextactError):
    """An operation received an empty collection where content is required."""


class EmptyFile(EmptyInput):
    """A parsed file contained no usable rows."""


class MalformedLine(NextactError):
    """A line in a structured text file did not match the expected layout."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class CodeLengthNot7(MalformedLine):
    """A procedure code in an order file was not exactly 7 characters."""


class UnknownConcept(NextactError):
    """A code was looked up in a taxonomy that does not contain it."""

    def __init__(self, code: str, taxonomy_id: str = ""):
        where = f" in taxonomy {taxonomy_id!r}" if taxonomy_id else ""
        super().__init__(f"unknown concept {code!r}{where}")
        self.code = code
        self.taxonomy_id = taxonomy_id


class UnknownCode(NextactError):
    """An ingested record referenced a code absent from its taxonomy."""

    def __init__(self, code: str, case_id: str = ""):
        where = f" (case {case_id})" if case_id else ""
        super().__init__(f"unknown code {code!r}{where}")
        self.code = code
        self.case_id = case_id


class MissingPrimaryDiagnosis(NextactError):
    """A case has no diagnosis with seq_num == 1, so it cannot be grouped."""

    def __init__(self, case_id: str):
        super().__init__(f"case {case_id!r} has no primary diagnosis")
        self.case_id = case_id


class TraceTooShort(NextactError):
    """A trace is too short for the requested operation."""


class EmptyLog(NextactError):
    """An event log with zero cases was passed where cases are required."""


class EmptySequence(NextactError):
    """An empty activity sequence was passed to a sequence similarity."""


class EmptyList(NextactError):
    """An empty diagnosis list was passed to a list similarity."""


class LengthMismatch(NextactError):
    """Paired samples of different lengths were passed to a paired test."""


class TooFewSamples(NextactError):
    """A statistical test needs at least two paired samples."""


class EmptyRecords(NextactError):
    """An aggregate was requested over zero evaluation records."""


class InvalidLog(NextactError):
    """A persisted event log file violates the expected schema."""
