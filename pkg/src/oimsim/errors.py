"""Exception types shared across the package."""


class OimError(Exception):
    """Base class for oimsim errors."""


class GraphFormatError(OimError, ValueError):
    """Malformed graph text (carries a 1-based line number in the message)."""


class CapError(OimError, ValueError):
    """An exhaustive operation was asked to exceed its hard size cap."""


class NumericalError(OimError, RuntimeError):
    """Numerical failure: non-finite data, asymmetry, eigensolver breakdown."""


class IntegrationError(NumericalError):
    """A non-finite state appeared during time integration.

    Attributes
    ----------
    step : index of the step that produced the bad state
    partial : Trajectory recorded up to the failure (may be None)
    """

    def __init__(self, message, step=None, partial=None):
        super().__init__(message)
        self.step = step
        self.partial = partial
