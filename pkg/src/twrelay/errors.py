"""Exceptions shared across the twrelay package."""


class TwrelayError(Exception):
    """Base class for all twrelay errors."""


class RankZeroError(TwrelayError):
    """A relay-to-node channel has no nonzero singular value.

    The trial is unusable: there is no subchannel to allocate power on in
    that direction. Callers running Monte-Carlo loops should drop the trial.
    """


class NonPSDError(TwrelayError):
    """A covariance matrix has an eigenvalue below -1e-9."""


class NoConvergenceError(TwrelayError):
    """Iterative water-filling did not converge within the sweep budget."""


class InvalidStrategyError(TwrelayError):
    """Source rates are mutually inconsistent.

    Raised when the multiple-access sum-rate is not strictly below the sum of
    the individual uplink rates (impossible for rates induced by actual
    covariances) or when it is below one of them.
    """


class ConfigError(TwrelayError):
    """Malformed scenario or system configuration."""
