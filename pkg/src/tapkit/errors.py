"""Exception types shared across the toolkit."""


class TapError(Exception):
    """Base class for all toolkit errors."""


class ParseError(TapError):
    """Input file is not syntactically valid."""


class ValidationError(TapError):
    """Input is well-formed but violates a domain rule.

    ``field`` holds a dotted/indexed path into the offending document,
    e.g. ``tas[2].employment_fraction``.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class SpecError(TapError):
    """Generator request is out of its documented range."""


class BadEdit(TapError):
    """Session edit rejected (bad index, pin out of range, unknown field)."""


class ModeError(TapError):
    """Operation requested under the wrong penalty mode."""


class BigMOverflow(TapError):
    """Bounds-derived big-M constant exceeds the integer width budget."""


class BudgetExceeded(TapError):
    """Brute-force enumeration would exceed its node budget."""


class MissingVariable(TapError):
    """Imported solution does not cover a required variable."""


class NonIntegerValue(TapError):
    """Imported solution assigns a non-integral value."""


class IndexMismatch(TapError):
    """Assignment and instance disagree on their index sets."""


class HardViolation(TapError):
    """Strict verification failed; carries the full Verdict."""

    def __init__(self, verdict):
        self.verdict = verdict
        first = verdict.hard_violations[0]
        super().__init__(
            f"hard constraint {first.origin} violated at {first.subject}: "
            f"measured {first.measured}, bound {first.bound} "
            f"({len(verdict.hard_violations)} violation(s) total)"
        )


class LengthMismatch(TapError):
    """Paired series have different lengths."""


class EmptySeries(TapError):
    """Metric requested over an empty series."""


class LabelMismatch(TapError):
    """Reports being compared belong to different instances."""
