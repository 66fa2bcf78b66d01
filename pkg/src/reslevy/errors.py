"""Exception hierarchy shared by every module of the package."""


class ReslevyError(Exception):
    """Base class for all errors raised by reslevy."""


class ParameterError(ReslevyError, ValueError):
    """A model or configuration parameter is outside its admissible range."""

    def __init__(self, param: str, message: str):
        self.param = param
        super().__init__(f"{param}: {message}")


class DomainError(ReslevyError, ValueError):
    """A function was evaluated outside its domain."""


class UnsupportedOperationError(ReslevyError, TypeError):
    """The operation is not defined for this model family."""


class ConfigurationError(ReslevyError, ValueError):
    """Simulation settings are inconsistent with the model (e.g. zero truncation
    for an infinite-activity family)."""


class PreconditionError(ReslevyError, ValueError):
    """A verification check was requested for a model violating its hypotheses."""

    def __init__(self, flag: str, message: str):
        self.flag = flag
        super().__init__(f"{flag}: {message}")


class NumericalMethodError(ReslevyError, ArithmeticError):
    """A numerical method produced output violating a known invariant."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)
