"""Exception hierarchy shared by the solvers and the command line."""


class HeatschedError(Exception):
    """Base class for every error raised by heatsched."""


class ValidationError(HeatschedError, ValueError):
    """Parameters or scenario data are out of their admissible range."""


class ParseError(HeatschedError):
    """A scenario or schedule file could not be parsed."""


class NoStrictlyFeasiblePoint(HeatschedError):
    pass


class IterationLimitExceeded(HeatschedError):
    """An iteration cap was hit.  ``partial`` holds the last iterate when
    the caller can still use it (a feasible schedule, for instance)."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class BracketInvalid(HeatschedError, ValueError):
    pass


class HorizonTooLarge(HeatschedError, ValueError):
    pass


class InfeasibleScenario(HeatschedError):
    pass


class NotTemperatureLimited(HeatschedError):
    pass


class NoValidHitSlot(HeatschedError):
    """No first-hit slot passes the KKT acceptance test (should not happen)."""


class DegenerateBudget(HeatschedError):
    """A zero cumulative energy prefix forces a zero power, where the
    high-SINR objective is unbounded below."""
