"""Exception hierarchy shared by every acw module."""


class ACWError(Exception):
    """Base class for all acw errors."""


class ZeroModulus(ACWError, ValueError):
    pass


class OrderOverflow(ACWError, ValueError):
    pass


class DimensionMismatch(ACWError, ValueError):
    pass


class IllFormedHom(ACWError, ValueError):
    pass


class CapExceeded(ACWError):
    """An operation would enumerate more than the configured cap allows."""


class EmptySet(ACWError, ValueError):
    pass


class GroupMismatch(ACWError, ValueError):
    pass


class ZeroProbabilityFiber(ACWError, ValueError):
    pass


class SupportEscape(ACWError, ValueError):
    pass


class DegenerateK(ACWError, ValueError):
    pass


class InsufficientMass(ACWError, ValueError):
    pass


class BadRadius(ACWError, ValueError):
    pass


class NoRegularRadiusFound(ACWError):
    pass


class NotRegular(ACWError):
    pass


class VerificationFailed(ACWError):
    """A post-hoc exact check failed. Always an implementation bug, never data."""


class ContainmentFailed(VerificationFailed):
    pass


class HypothesisFailed(ACWError):
    """A proposition's hypothesis does not hold numerically.

    ``name`` identifies the hypothesis and ``values`` carries the measured
    quantities so callers can report them.
    """

    def __init__(self, name, message="", **values):
        super().__init__(f"{name}: {message}" if message else name)
        self.name = name
        self.values = values


class Infeasible(ACWError):
    def __init__(self, binding, message=""):
        super().__init__(f"infeasible (binding constraint {binding}) {message}".strip())
        self.binding = binding
