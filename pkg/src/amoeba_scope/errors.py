"""Exception hierarchy.

``ValidationError`` subclasses signal bad input (CLI exit code 2);
``NumericFailure`` subclasses signal that a computation could not be carried
out (exit code 3).
"""


class AmoebaError(Exception):
    """Base class for all package errors."""


class ValidationError(AmoebaError, ValueError):
    pass


class NumericFailure(AmoebaError, ArithmeticError):
    pass


class ParseError(ValidationError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"{message} (line {line}, column {column})")


class ConfigError(ValidationError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class UnknownScenario(ValidationError):
    pass


class ExcludedParameter(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class DegenerateLinear(ValidationError):
    pass


class GeneratorNotInIdeal(ValidationError):
    pass


class NonConvergence(NumericFailure):
    pass


class DegenerateRestriction(NumericFailure):
    pass


class SingularPoint(NumericFailure):
    pass


class DegeneratePolytope(NumericFailure):
    pass


class AmbiguousNormal(NumericFailure):
    pass


class EntireFamily(NumericFailure):
    pass


class NoPinch(NumericFailure):
    pass


class InsufficientSamples(NumericFailure):
    pass
