"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid model, configuration or argument."""


class CapacityError(InputError):
    """Problem too large for an exhaustive routine."""
