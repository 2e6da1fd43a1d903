"""Shared exception types."""


class InputError(ValueError):
    """Malformed or inconsistent arguments (length mismatch, bad range)."""


class CapacityError(ValueError):
    """Requested instance exceeds the configured dense-representation caps."""


class PromiseViolation(ValueError):
    """A declared precondition (entropy promise, generator contract) failed
    when re-checked numerically."""
