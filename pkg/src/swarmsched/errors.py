class SwarmSchedError(Exception):
    """Base class for all errors raised by this package."""


class PlacementFailure(SwarmSchedError):
    pass


class DisconnectedTopology(SwarmSchedError):
    pass


class ParseError(SwarmSchedError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MissingUpdate(SwarmSchedError):
    pass


class DimensionMismatch(SwarmSchedError):
    pass


class DivergenceDetected(SwarmSchedError):
    pass
