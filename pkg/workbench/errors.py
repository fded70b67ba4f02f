# =============================================================================
# ERRORS
# Exception hierarchy shared by every engine
# =============================================================================
#
# Exit codes (see main.py):
# - DomainError / PreconditionError -> 2 (usage)
# - ResourceCapError                 -> 3
# - InvariantBreach                  -> 4
#
# =============================================================================


class WorkbenchError(Exception):
    """Base class for all workbench failures."""

    exit_code = 1


class DomainError(WorkbenchError, ValueError):
    """Input outside the domain of an operation."""

    exit_code = 2


class PreconditionError(DomainError):
    """Operation requires a property the input does not have (e.g. rotation-only)."""


class ResourceCapError(WorkbenchError):
    """A configured iteration cap was exceeded."""

    exit_code = 3

    def __init__(self, what: str, cap: int):
        self.what = what
        self.cap = cap
        super().__init__(f"{what} exceeded cap of {cap}")


class InvariantBreach(WorkbenchError):
    """Internal consistency check failed. Results must not be trusted."""

    exit_code = 4
