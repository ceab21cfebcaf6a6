"""Exception hierarchy.

Two families matter to callers: :class:`ConfigError` (bad user input,
CLI exit code 2) and :class:`NumericalError` (a computation could not meet
its accuracy contract, CLI exit code 3).
"""


class Ql1simError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(Ql1simError, ValueError):
    """Invalid user-supplied input or configuration."""


class NumericalError(Ql1simError, ArithmeticError):
    """A numerical procedure failed to reach its target accuracy."""


class InvalidArgument(ConfigError):
    """A parameter outside its documented range."""


class ParseError(ConfigError):
    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = tuple(expected)
        detail = f"{message} at offset {offset}"
        if expected:
            detail += f" (expected one of: {', '.join(expected)})"
        super().__init__(detail)


class TimeOutOfDomain(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class NotHermitian(ConfigError):
    pass


class NotUnitary(ConfigError):
    pass


class NegativeCoefficient(ConfigError):
    pass


class InvalidBound(ConfigError):
    pass


class ZeroHamiltonian(ConfigError):
    pass


class ZeroTerm(ConfigError):
    pass


class NonPositiveNorm(ConfigError):
    pass


class OutOfRange(ConfigError):
    pass


class SparsityViolation(ConfigError):
    pass


class MissingInput(ConfigError):
    pass


class NegativeInput(ConfigError):
    pass


class NonPositiveSeparation(ConfigError):
    pass


class BudgetExceeded(ConfigError):
    pass


class QuadratureNonConvergent(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class StepTooLarge(NumericalError):
    pass
