"""Exception types shared across the toolkit.

Raised errors carry messages naming the offending file, line, row id, or
class so failures are actionable without a debugger. Callers that need to
distinguish failure families catch the class; tests match on message text.
"""


class ShiftlabError(Exception):
    """Base class for all toolkit errors."""


class FormatError(ShiftlabError):
    """A file on disk violates its format contract (bad magic, truncation,
    malformed line, mismatched counts)."""


class ValidationError(ShiftlabError):
    """In-memory values violate a type invariant or an operation's
    preconditions (duplicate ids, empty restriction, degenerate inputs)."""
