"""Exception types raised across the package.

Every error carries a stable class name; the CLI reports that name for
domain failures.
"""


class PTSSHError(Exception):
    """Base class for all domain errors."""


class NotHermitian(PTSSHError):
    pass


class NoConvergence(PTSSHError):
    pass


class Overflow(PTSSHError, OverflowError):
    pass


class ZeroNorm(PTSSHError):
    pass


class DegenerateSpectrum(PTSSHError):
    pass


class DegenerateGround(PTSSHError):
    pass


class BoundaryMismatch(PTSSHError):
    pass


class BracketFailure(PTSSHError):
    pass


class InvalidState(PTSSHError):
    pass


class NoDominantMode(PTSSHError):
    pass


class TraceTooShort(PTSSHError):
    pass


class MissingAsymptote(PTSSHError):
    pass


class RegimeViolation(PTSSHError):
    pass


class EmptySeries(PTSSHError):
    pass
