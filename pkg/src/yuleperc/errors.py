"""Exception types raised across the package."""


class ParameterError(ValueError):
    """Invalid model or run parameters (CLI exit status 1)."""


class ConvergenceError(ArithmeticError):
    """A series or quadrature failed to reach its tolerance (CLI exit status 2)."""


class SeriesDivergenceError(ConvergenceError):
    """The requested series representation does not converge at this argument."""


class InvariantViolation(RuntimeError):
    """An internal bookkeeping identity failed; indicates a simulator bug."""
