"""Exception hierarchy shared by the solver modules."""


class SwiptError(Exception):
    """Base class for every error raised by :mod:`swiptbf`."""


class InputError(SwiptError, ValueError):
    """Malformed or non-finite numerical input."""


class DimensionError(InputError):
    pass


class RankError(SwiptError):
    """A matrix does not have the rank an operation requires."""


class PreconditionError(SwiptError, ValueError):
    pass


class InfeasibleError(SwiptError):
    """The SINR targets cannot be met within the power budget (or at all)."""


class ConvergenceError(SwiptError):
    """An iterative method hit its iteration cap before converging."""


class NonPsdNoiseError(SwiptError):
    """Effective uplink noise-plus-interference matrix of user ``index`` is not PSD."""

    def __init__(self, index, min_eig):
        self.index = index
        self.min_eig = min_eig
        super().__init__(f"Z_{index} is not PSD (min eigenvalue {min_eig:.3e})")


class MappingError(SwiptError):
    """Uplink-to-downlink power mapping failed (coupling matrix spectral radius >= 1)."""


class ApplicabilityError(SwiptError):
    pass


class ClassificationError(SwiptError):
    pass


class SdpError(SwiptError):
    """Interior-point SDP solver failure."""

    def __init__(self, message, status="failed"):
        self.status = status
        super().__init__(message)


class ScenarioParseError(InputError):
    """Scenario/config document could not be parsed; carries a source position."""

    def __init__(self, message, line=None, column=None, path=None):
        self.line = line
        self.column = column
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:{column}:"
        super().__init__(f"{where} {message}".strip())
