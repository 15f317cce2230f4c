"""Exception types shared across the package."""


class BipbisError(Exception):
    """Base class for all library errors."""


class ParameterError(BipbisError, ValueError):
    """A parameter violates an operation's precondition."""


class CapacityError(BipbisError):
    """An exact computation was requested beyond the configured instance limit."""


class CompatibilityViolation(BipbisError):
    """A local-function pair produced a dependent set.

    Carries one violating edge as ``edge = (l_index, r_index)``.
    """

    def __init__(self, message: str, edge: tuple[int, int]):
        super().__init__(message)
        self.edge = edge
