"""Exception and warning types raised by the solver library."""


class MechanismError(ValueError):
    """Base class for invalid inputs or infeasible states."""


class NonPositiveSupport(MechanismError):
    pass


class EmptySupport(MechanismError):
    pass


class ZeroDensity(MechanismError):
    pass


class NegativeParticipation(MechanismError):
    pass


class UnboundedResponse(MechanismError):
    """Reward slope is at or above the marginal cost, so the agent never stops participating."""


class NonMonotoneAlpha(MechanismError):
    pass


class AlphaExceedsCost(MechanismError):
    pass


class EmptyGrid(MechanismError):
    pass


class ConfigError(MechanismError):
    """Problem configuration failed to parse or validate."""


class MaxItersExceeded(RuntimeWarning):
    """Solver hit its iteration budget before the control settled."""
