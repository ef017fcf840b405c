"""Exception hierarchy shared by every module."""


class RobustSplineError(Exception):
    """Base class for all library errors."""


class DesignError(RobustSplineError):
    """Design points violate ordering, domain or size requirements."""


class InputError(RobustSplineError, ValueError):
    """Non-finite or out-of-range input."""


class NumericalError(RobustSplineError, ArithmeticError):
    """A solver or quadrature routine broke down."""


class DensityError(RobustSplineError):
    """A density evaluated to a non-positive value where positivity is required."""


class BudgetError(RobustSplineError, ValueError):
    """Corruption budget exceeds the sample size."""


class LogicError(RobustSplineError):
    """Inputs are individually valid but mutually inconsistent."""


class ConstructionError(RobustSplineError):
    """The lower-bound construction cannot be built for these inputs."""


class ConfigError(RobustSplineError):
    """Experiment configuration failed validation.

    ``path`` is a dotted field path such as ``"attacks[1].kind"``.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class RegimeWarning(UserWarning):
    """Smoothing parameter lies outside the regime the rate theory assumes."""
