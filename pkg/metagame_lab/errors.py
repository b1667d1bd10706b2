class MetagameError(Exception):
    """Base class for errors raised by metagame_lab."""


class InvalidArgument(MetagameError, ValueError):
    pass


class ProtocolViolation(MetagameError, RuntimeError):
    """A learner was driven out of its act/observe order, or fed the wrong feedback mode."""


class AssumptionViolated(MetagameError, ValueError):
    """The no-weakly-dominated-action assumption fails for the game at hand."""


class SolverError(MetagameError, RuntimeError):
    pass
