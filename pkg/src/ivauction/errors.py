"""Exception types shared across the package."""


class AuctionError(Exception):
    """Base class for all solver errors."""


class WrongArity(AuctionError):
    """A fast path was invoked outside its n/k regime."""


class NotMonotone(AuctionError):
    """An operation required a monotone allocation or instance and got none.

    Carries the first violation as ``violation`` when one is known:
    a tuple (agent, context_profile, low_signal, high_signal).
    """

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


class PreconditionViolation(AuctionError):
    """A documented precondition failed; ``certificate`` explains why."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class IntegralityNotGuaranteed(AuctionError):
    """Integral-LP path invoked with n >= 3 and k >= 3."""


class NotFeasible(AuctionError):
    """A point handed to a vertex check violates the region."""


class TooLarge(AuctionError):
    """Brute-force search space exceeds the size cap."""


class PropagationTimeout(AuctionError):
    """Backtracking search exhausted its node budget (not a verdict)."""


class MalformedFormula(AuctionError):
    """A 1-in-3 formula failed validation."""
