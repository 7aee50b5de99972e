"""Exception hierarchy shared by all ethlab modules.

Errors split into two families: *usage* errors (bad parameters, things a
caller can fix) and *numerical* errors (the computation itself went wrong).
The CLI maps usage errors to exit code 1 and numerical errors to exit code 2.
"""


class EthLabError(Exception):
    """Base class for all ethlab errors."""


class UsageError(EthLabError):
    """Invalid parameters or requests; the caller can fix these."""


class NumericalError(EthLabError):
    """The computation failed or produced inconsistent results."""


class InvalidSpec(UsageError):
    """A chain/block/config parameter violates its invariants."""


class DimensionLimit(UsageError):
    """Requested Hilbert-space dimension exceeds the configured limit."""


class ShellEmpty(UsageError):
    """An energy window contains no eigenstates."""


class ConvergenceFailure(NumericalError):
    """An iterative solver (eigensolver, root bracket) did not converge."""


class SingularLocalState(NumericalError):
    """A reduced state is numerically rank-deficient under the strict policy."""


class InternalConsistencyError(NumericalError):
    """A quantity violated a bound it is mathematically guaranteed to obey."""
