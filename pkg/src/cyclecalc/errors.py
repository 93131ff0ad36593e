"""Engine-wide exception types.

The distinction between BudgetExceeded and the other errors matters: a budget
failure says "the computation was cut off", never "the mathematics is false".
PolicyReject likewise marks a question the properness policy refuses to
answer, which callers must surface as a third verdict rather than as False.
"""


class EngineError(Exception):
    """Base class for all errors raised by the engine."""


class RingMismatch(EngineError):
    """Operands live in different polynomial rings."""


class BudgetExceeded(EngineError):
    """A resource budget (pair count, degree cap) was hit.

    Reported distinctly from mathematical failure so that blown-up
    eliminations are diagnosable.
    """

    def __init__(self, what: str, limit: int):
        super().__init__(f"budget exceeded: {what} > {limit}")
        self.what = what
        self.limit = limit


class PolicyReject(EngineError):
    """The properness policy cannot certify the requested projection.

    This is not a claim of non-properness; it means neither of the two
    accepted certificates (projective factors, monic eliminants) applies.
    """


class RegularityError(EngineError):
    """A declared sequence failed the stepwise codimension-drop check."""


class FlatnessError(EngineError):
    """A pullback was requested along a map not declared/verified flat."""


class ScenarioError(EngineError):
    """Scenario file error, with source position when available."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        pos = f" (line {line}, col {column})" if line else ""
        super().__init__(message + pos)
        self.line = line
        self.column = column
