"""Exception hierarchy shared by all hypgauge modules."""


class HypgaugeError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(HypgaugeError, ValueError):
    """An argument lies outside the domain of a formula or constructor."""


class OutOfDisk(DomainError):
    pass


class PreconditionNotMet(HypgaugeError):
    """A theorem's hypothesis (for instance ``lambda > 2``) does not hold."""


class EmptyIntersection(HypgaugeError):
    pass


class NonInteriorStart(HypgaugeError):
    pass


class NonInteriorPoint(HypgaugeError):
    pass


class NonConvergence(HypgaugeError):
    pass


class CoincidentPoints(HypgaugeError):
    pass


class GateOrderInvalid(HypgaugeError):
    pass


class ZeroSurvivors(HypgaugeError):
    def __init__(self, stage, message=None):
        self.stage = stage
        super().__init__(message or f"no walker reached gate {stage}")


class Disconnected(HypgaugeError):
    pass


class GridTooCoarse(HypgaugeError):
    pass


class NonRectilinear(HypgaugeError):
    pass


class DepthTooLarge(DomainError):
    pass


class InsufficientGrid(HypgaugeError):
    pass


class ConfigParse(HypgaugeError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GraphTooLarge(HypgaugeError):
    """The path graph would exceed the node budget."""
