"""Exception hierarchy shared by every inac_sim module."""


class InacError(Exception):
    """Base class for all simulator errors."""


# --- TLE ingestion -------------------------------------------------------

class TleError(InacError, ValueError):
    """A TLE record could not be accepted.

    ``line_number`` is 1-based within the parsed text, or None when the error
    is not tied to a particular line.
    """

    def __init__(self, message, line_number=None):
        self.line_number = line_number
        self.reason = message
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class MalformedLine(TleError):
    pass


class ChecksumMismatch(TleError):
    pass


class FieldParse(TleError):
    pass


class ElementOutOfRange(TleError):
    pass


# --- orbit / frames ------------------------------------------------------

class NonConvergence(InacError, ArithmeticError):
    """An iterative method hit its iteration cap.

    Solvers attach their last iterate as ``solution`` (converged=False).
    """

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class EpochTooFar(InacError, ValueError):
    pass


class FrameMismatch(InacError, ValueError):
    pass


class DegenerateInput(InacError, ValueError):
    pass


# --- geometry / solvers --------------------------------------------------

class CoincidentPoints(InacError, ValueError):
    pass


class InsufficientSats(InacError, ValueError):
    pass


class InsufficientAnchors(InsufficientSats):
    pass


class SingularGeometry(InacError, ArithmeticError):
    pass


# --- link layer ----------------------------------------------------------

class LengthMismatch(InacError, ValueError):
    pass


class NonPositiveInput(InacError, ValueError):
    pass


class NonPositiveNoise(NonPositiveInput):
    pass


# --- scenario runner -----------------------------------------------------

class ConfigError(InacError):
    pass


class SchemaError(ConfigError, ValueError):
    pass


class SemanticError(ConfigError, ValueError):
    pass


class MissingFile(ConfigError, FileNotFoundError):
    pass


class HeaderMismatch(InacError, ValueError):
    pass


class ScenarioError(InacError, RuntimeError):
    """A module error raised inside a sweep, annotated with where it happened."""

    def __init__(self, message: str, sweep_value=None, trial=None):
        where = []
        if sweep_value is not None:
            where.append(f"sweep value {sweep_value}")
        if trial is not None:
            where.append(f"trial {trial}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.sweep_value = sweep_value
        self.trial = trial
