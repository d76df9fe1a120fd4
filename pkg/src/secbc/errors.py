"""Exception types shared across the package.

Plain invalid arguments (wrong shapes, bad flags, violated preconditions)
raise the builtin ``ValueError``; the classes below mark numerical and
model-level failure modes that callers may want to handle separately.
"""


class SecbcError(Exception):
    """Base class for numerical / model failures raised by this package."""


class SingularMatrixError(SecbcError):
    """A matrix that must be strictly positive definite is singular
    within tolerance."""


class DegenerateChannelError(SecbcError):
    """A noise covariance is singular, so the channel degenerates to a
    noiseless (infinite-capacity) one."""


class DegenerateInstanceError(SecbcError):
    """A random-coding instance has a degenerate auxiliary variable, so a
    differential mutual-information term would be infinite."""
