"""Exception types shared across the package."""


class RauzyError(Exception):
    """Base class for all package errors."""


class NonGenericError(RauzyError):
    """The comparison lengths tied (boundary point); the step is undefined.

    Ties are measure zero and never tie-broken: any convention would bias
    orbit statistics.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class CapExceededError(RauzyError):
    """A single accelerated step needed more elementary steps than the cap."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DenominatorOverflowError(RauzyError):
    """Exact-backend denominators outgrew the configured bit bound."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class IncompatibleWordError(RauzyError):
    """Adjacent letters violate the compatibility function."""


class NotFoundError(RauzyError):
    """A bounded search was exhausted without a hit."""


class InsufficientDataError(RauzyError):
    """Not enough samples or lags to run the requested estimator."""


class RejectionBudgetError(RauzyError):
    """Rejection sampling exhausted its retry budget."""
