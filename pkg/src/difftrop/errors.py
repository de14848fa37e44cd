"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: input problems (bad syntax, violated
preconditions) map to exit code 2, internal-consistency failures (a checked
postcondition that the underlying theory guarantees) map to exit code 3.
"""


class DifftropError(Exception):
    """Base class for all package errors."""


class InputError(DifftropError):
    """Bad user input: syntax errors, violated operation preconditions."""


class ParseError(InputError):
    """Syntax error in the text grammar; carries line/column info."""

    def __init__(self, message, line=1, col=0):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class PrecisionError(DifftropError):
    """A truncated series does not carry enough terms for the request."""


class ValuationUnknownError(PrecisionError):
    """Valuation of a series with no known terms below its truncation."""


class OracleUnavailableError(DifftropError):
    """A nontrivial residue automorphism was requested without a solver."""


class ResidueSolveError(DifftropError):
    """No nonzero root exists for a collapsed residue equation."""


class NonrootSearchExhaustedError(DifftropError):
    """The integer-point enumeration budget was hit before a nonroot."""


class InternalConsistencyError(DifftropError):
    """A theory-guaranteed postcondition failed; indicates a bug."""


class LiftBudgetExceededError(DifftropError):
    """The refinement loop hit its iteration cap before the target."""
