"""Exception hierarchy shared by every module."""


class ManipMarketError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ManipMarketError, ValueError):
    """An argument lies outside the domain of the operation."""


class IndeterminatePayoffError(DomainError):
    """A payoff difference would evaluate to inf - inf."""


class UndefinedPosteriorError(DomainError):
    """The conditioning event of a posterior has zero probability."""


class ValidationError(ManipMarketError, ValueError):
    """Malformed model or configuration input.

    ``field`` names the offending field (with index where relevant).
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class SolverError(ManipMarketError, RuntimeError):
    """Root finding failed (no sign change on the bracket)."""


class ConfigurationError(ManipMarketError, ValueError):
    """A request is inconsistent with the supplied configuration."""
