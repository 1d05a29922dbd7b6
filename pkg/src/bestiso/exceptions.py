class CycleError(ValueError):
    """Raised when an edge list does not describe an acyclic graph."""


class ConvergenceError(RuntimeError):
    """Raised when a bisection fails to reach its tolerance within the cap."""


class BudgetExceededError(ValueError):
    """Raised when a grid dynamic program would exceed its size budget."""


class StabilizationError(RuntimeError):
    """Raised when a limit over an exponent schedule has not settled."""
