"""Exception types raised across the package."""


class HLError(Exception):
    """Base class for all package errors."""


class MalformedInput(HLError, ValueError):
    """Input data violates a structural invariant (unknown ids, bad weights, ...)."""


class CapacityError(HLError):
    """An exact computation was requested on a family larger than the configured cap."""

    def __init__(self, size, cap):
        super().__init__(f"exact norm needs at most {cap} sets, got {size}; "
                         f"raise the cap or use a bound mode")
        self.size = size
        self.cap = cap


class HypothesisError(HLError, ValueError):
    """A covering-lemma hypothesis is violated; ``witness`` names the offender."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConfigurationError(HLError, ValueError):
    """Window, scale range or experiment parameters cannot certify the result."""


class SamplingError(HLError):
    """Rejection sampling ran out of budget."""
