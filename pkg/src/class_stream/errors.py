"""Exception types raised by the segmentation engine."""


class InputError(ValueError):
    """A measurement or input record is unusable (non-finite, malformed)."""

    def __init__(self, message: str, lineno: int | None = None):
        super().__init__(message)
        self.lineno = lineno


class StateError(RuntimeError):
    """An operation was called before its preconditions were met."""


class DeliveryError(RuntimeError):
    """A change-point sink raised while a detection was being delivered."""
