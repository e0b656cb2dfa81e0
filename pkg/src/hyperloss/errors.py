"""Exception hierarchy shared by all modules."""


class HyperlossError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(HyperlossError, ValueError):
    """A parameter is outside its allowed domain."""


class InvalidState(HyperlossError):
    """A spectral state violates Hermiticity or the uncertainty relation."""


class ConfigError(HyperlossError, ValueError):
    """A network or chain description cannot be resolved."""


class InvalidProblem(HyperlossError, ValueError):
    """An optimization problem is ill-posed."""


class BudgetExceeded(HyperlossError, RuntimeError):
    """An optimizer would need more objective evaluations than allowed."""
