"""Exception hierarchy.

Two branches matter for the CLI exit codes: ValidationError (bad input data
or parameters, exit 2) and ModelError (missing/incompatible models, exit 3).
"""


class TexiveError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(TexiveError):
    """Invalid input data or parameters."""


class ModelError(TexiveError):
    """Missing, stale, or incompatible model."""


# trace/keystroke parsing
class MalformedRecord(ValidationError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class NonMonotonicTimestamp(ValidationError):
    pass


class NonFiniteValue(ValidationError):
    pass


class EmptyTrace(ValidationError):
    pass


class SchemaVersionMismatch(ModelError):
    pass


# orientation
class NotStatic(ValidationError):
    pass


class NonIncreasingTime(ValidationError):
    pass


# features
class EmptySignal(ValidationError):
    pass


class KTooLarge(ValidationError):
    pass


# activity
class InsufficientExamples(ValidationError):
    pass


class DimensionMismatch(ModelError):
    pass


class UnknownLabel(ValidationError):
    pass


# localize
class ModelNotTrained(ModelError):
    pass


class EmptyEvidence(ValidationError):
    pass


# texting
class TooFewEvents(ValidationError):
    pass


# scheduler
class EmptyData(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass


# simulator
class InvalidScenario(ValidationError):
    pass


# pipeline
class NoEntryEvidence(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass
