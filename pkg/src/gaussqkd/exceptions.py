class GaussQKDError(Exception):
    """Base class for all errors raised by gaussqkd."""


class ParameterError(GaussQKDError, ValueError):
    """A protocol, channel or transform parameter is out of range or malformed."""


class UnphysicalStateError(GaussQKDError, ValueError):
    """A covariance matrix violates the uncertainty principle (Gamma + i Omega >= 0)."""
