"""Exception hierarchy.

Every error carries the CLI exit status it maps to, so the front end can
translate failures without a lookup table.
"""


class TuringRDError(Exception):
    exit_code = 1


class ConfigError(TuringRDError, ValueError):
    """Bad configuration document or command-line value."""

    exit_code = 1

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MissingKey(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


class ConfigTypeError(ConfigError, TypeError):
    pass


class AnalysisError(TuringRDError, ValueError):
    """The requested analysis is undefined for the given parameters."""

    exit_code = 2


class DomainError(AnalysisError):
    pass


class NoInteriorEquilibrium(AnalysisError):
    pass


class NullclineSingularity(AnalysisError):
    pass


class EmptyWindow(AnalysisError):
    pass


class WindowViolation(AnalysisError):
    pass


class NotSingular(AnalysisError):
    pass


class NumericalFailure(TuringRDError, RuntimeError):
    exit_code = 3


class GridTooSmall(TuringRDError, ValueError):
    pass


class GridMismatch(TuringRDError, ValueError):
    pass


class StepRejected(NumericalFailure):
    pass


class NonFiniteState(NumericalFailure):
    pass


class AmplitudeClipped(UserWarning):
    """A first-order pattern profile left the admissible state region."""


class MultipleEquilibria(UserWarning):
    pass
