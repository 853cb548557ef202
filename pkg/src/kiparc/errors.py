"""Exception hierarchy shared by the numerical core and the command line."""


class KiparcError(Exception):
    """Base class for every error raised by this package."""


class NumericError(KiparcError):
    """A solver, scattering or fitting failure (CLI exit code 3)."""


class PoleProximityError(NumericError):
    """A tangent argument of the characteristic equation sits on a pole."""


class NoRootError(NumericError):
    pass


class MultipleRootsError(NumericError):
    pass


class InconsistentModesError(NumericError):
    """Boundary conditions cannot be met: the frequency is not a resonance."""


class PoleError(NumericError):
    """The linear response denominator vanishes (at or above oscillation threshold)."""


class ZeroPumpError(NumericError):
    pass


class DegenerateError(NumericError):
    pass


class ConvergenceError(NumericError):
    pass


class ThresholdError(NumericError):
    """Pump rate at or above the parametric oscillation threshold."""


class IllConditionedError(NumericError):
    pass


class ConfigError(KiparcError):
    """Invalid scenario configuration (CLI exit code 2).

    ``path`` names the offending key, e.g. ``device.modes.kappa_a_Hz``.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class DataError(KiparcError):
    """A dataset file does not parse or does not match its schema."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OutputError(KiparcError):
    """Output files cannot be written or would be overwritten (CLI exit code 4)."""
