"""Exception types shared across the toolchain."""


class MemspathError(Exception):
    """Base class for all errors raised by this package."""


class Diagnostic:
    """One front-end message tied to a source position."""

    def __init__(self, line, col, message, kind="error", filename="<input>"):
        self.line = line
        self.col = col
        self.message = message
        self.kind = kind
        self.filename = filename

    def __str__(self):
        return f"{self.filename}:{self.line}:{self.col}: error: {self.message}"

    def __repr__(self):
        return f"Diagnostic({self!s})"


class ParseError(MemspathError):
    """Source text could not be turned into a resolved syntax tree.

    ``kind`` of each diagnostic is one of ``syntax``, ``unsupported``
    (C construct outside the accepted subset) or ``unresolved`` (name
    resolution failure).
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class TargetNotFound(MemspathError):
    """An instrumentation target function does not exist in the program."""


class NotInstrumentedByUs(MemspathError):
    """strip() was given text without any of our marker comments."""


class DataDependentBranch(MemspathError):
    """A branch condition reads array contents; paths cannot be enumerated."""


class UnboundedDomain(MemspathError):
    """A symbolic input variable has no declared (lo, hi) domain."""


class BudgetExceeded(MemspathError):
    """Counting this condition would enumerate more points than allowed."""


class EmptyOrZeroWeight(MemspathError):
    """The estimator needs at least one path with a positive frequency."""


class InterpreterError(MemspathError):
    """Dynamic execution failed; carries the partial run record."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class StepLimitExceeded(InterpreterError):
    pass


class DivisionByZero(InterpreterError):
    pass


class IndexOutOfBounds(InterpreterError):
    pass


class InvalidArraySize(InterpreterError):
    """Array declared with a negative or excessive length."""


class CallDepthExceeded(InterpreterError):
    pass


class CompileFailed(MemspathError):
    """External compiler returned nonzero; carries its stderr."""

    def __init__(self, message, stderr=""):
        super().__init__(message)
        self.stderr = stderr


class OutputFormatMismatch(MemspathError):
    """Run output did not match the instrumented stdout format."""

    def __init__(self, message, line=None, expected=None):
        super().__init__(message)
        self.line = line
        self.expected = expected


class NonDeterministicCounts(MemspathError):
    """Repeated runs of one binary reported different counters."""


class DegenerateInput(MemspathError):
    """Correlation input too short or constant."""


class NoOverlappingBuckets(MemspathError):
    """Two row sets share no nonempty mems bucket."""
