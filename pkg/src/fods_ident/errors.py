"""Exception hierarchy. ``category`` is the tag the CLI prints on failure."""


class FodsError(Exception):
    category = "error"


class OrderError(FodsError, ValueError):
    category = "order"


class HorizonError(FodsError, ValueError):
    category = "horizon"


class DimensionError(FodsError, ValueError):
    category = "dimension"


class DesignError(FodsError, ValueError):
    """Rank-deficient or otherwise unusable regression design."""

    category = "design"


class DivergenceError(FodsError, ArithmeticError):
    """A simulated state left the finite range; ``step`` is the failing index."""

    category = "divergence"

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DomainWarning(UserWarning):
    pass


class ConditioningWarning(UserWarning):
    pass
