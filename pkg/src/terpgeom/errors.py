"""Exception hierarchy shared by the library and the command line front end."""


class TerpError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ValidationError(TerpError, ValueError):
    """Input data violates a documented precondition."""

    exit_code = 2


class RankError(ValidationError):
    """A family of columns does not have full rank."""


class ScopeError(ValidationError):
    """The requested computation lies outside the supported scope."""


class DegenerateError(TerpError, ArithmeticError):
    """A numerical quantity sits inside its zero threshold."""

    exit_code = 3


class ConsistencyError(TerpError, AssertionError):
    """Two independent evaluations of the same quantity disagree."""

    exit_code = 3
