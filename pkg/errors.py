"""Exception hierarchy shared by every clawpack module."""


class ClawpackError(Exception):
    """Base class for all clawpack errors."""


class InputError(ClawpackError, ValueError):
    """Malformed file, invalid instance or rejected parameter."""


class ContractError(ClawpackError):
    """A documented precondition or an internal certificate does not hold."""


class BudgetExceeded(ClawpackError):
    """A work or memory guard tripped.

    ``best`` carries the best object found so far (if any) and ``nodes`` the
    amount of work spent before giving up.
    """

    def __init__(self, message, best=None, nodes=0):
        super().__init__(message)
        self.best = best
        self.nodes = nodes


class SearchIncomplete(BudgetExceeded):
    """Circular search stopped before it could rule out an improvement."""


class PrecisionError(ClawpackError):
    """An interval comparison stayed undecided at the precision cap."""
