"""Exception hierarchy. Each CLI exit code maps to one branch."""


class PhantomEYMError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DomainError(PhantomEYMError, ValueError):
    """Non-finite or out-of-domain input to a pure function."""

    exit_code = 2


class InadmissibleDataError(DomainError):
    """Initial data outside ``r0 > 0, |w0| <= 1, E0 >= 0``."""


class IntegrationFailure(PhantomEYMError):
    """The integrator produced a non-finite state or exhausted its step budget.

    ``trajectory`` holds everything up to the last good node.
    """

    exit_code = 5

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class BracketError(PhantomEYMError):
    """Shooting bracket endpoints do not straddle a class boundary."""

    exit_code = 3

    def __init__(self, message, lo_class=None, hi_class=None):
        super().__init__(message)
        self.lo_class = lo_class
        self.hi_class = hi_class


class BuildError(PhantomEYMError):
    """A half of the requested wormhole is not asymptotically flat."""

    exit_code = 3

    def __init__(self, message, orbit_class=None):
        super().__init__(message)
        self.orbit_class = orbit_class


class PhantomFreeError(BuildError):
    """E0 = 0, so the temporal coefficient cannot be recovered from zeta."""


class AsymptoticsUnconverged(PhantomEYMError):
    exit_code = 4
