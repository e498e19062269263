"""Exception types raised by flexbeam."""


class FlexbeamError(Exception):
    """Base class for all library errors."""


class InfeasibleRegionError(FlexbeamError, ValueError):
    """The moving region cannot hold N antennas at the minimum spacing."""


class InfeasibleGridError(FlexbeamError):
    """No grid point is available for an antenna during the search stage."""


class BisectionError(FlexbeamError):
    """The dual-variable bracket does not contain a root."""


class ConvergenceError(FlexbeamError):
    """An iterative routine ran out of iterations.

    The last iterate is kept on ``last_iterate`` so callers can inspect it.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class UnsupportedSizeError(FlexbeamError, ValueError):
    """Problem size outside what an exhaustive routine accepts."""
