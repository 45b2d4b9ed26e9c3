class NormalizationError(ValueError):
    """State vector is not normalized."""


class InvalidPovmError(ValueError):
    """POVM elements are not positive or do not sum to the identity."""


class UnsatisfiableError(ValueError):
    """No signature length reaches the requested security level."""


class UnknownCheckError(ValueError):
    """Requested verification check does not exist."""
