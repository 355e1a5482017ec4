"""Exception types shared across the package."""


class BudgetExceededError(RuntimeError):
    """An enumeration guard refused to run (too many supports, grid points, or dimensions)."""

    def __init__(self, message, count=None, budget=None):
        super().__init__(message)
        self.count = count
        self.budget = budget


class NumericalFailureError(RuntimeError):
    """A solver produced a non-finite iterate.

    Carries the last all-finite state so callers can inspect where the
    iteration blew up.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
