"""Exception hierarchy shared by every module."""


class ZeroRegretsError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ZeroRegretsError, ValueError):
    """Malformed instance data, dimension mismatch, or an ill-posed game."""


class BackendError(ZeroRegretsError, RuntimeError):
    """The MILP engine failed or reported an unexpected status."""


class NumericalError(ZeroRegretsError, RuntimeError):
    """A solver point failed exact re-verification after rounding."""


class OracleTimeout(ZeroRegretsError, TimeoutError):
    """A best-response subproblem ran out of time."""


class InternalError(ZeroRegretsError, AssertionError):
    """An invariant that should hold by construction was violated."""
