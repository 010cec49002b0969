"""Shared exception types."""


class ConfGraphError(Exception):
    """Base class for all errors raised by this package."""


class DuplicateEvent(ConfGraphError):
    pass


class DuplicateOutcome(ConfGraphError):
    pass


class UnknownEvent(ConfGraphError):
    pass


class UnknownOutcome(ConfGraphError):
    pass


class SelfLink(ConfGraphError):
    pass


class CycleIntroduced(ConfGraphError):
    pass


class DuplicateLink(ConfGraphError):
    pass


class ContradictoryLogicalLinks(ConfGraphError):
    pass


class MalformedQuery(ConfGraphError):
    pass


class NoProof(ConfGraphError):
    """Raised when an explanation is requested for an Unknown verdict."""


class Infeasible(ConfGraphError):
    """The sampler exhausted its retry budget without a consistent distribution."""

    def __init__(self, message: str, tries: int = 0):
        super().__init__(message)
        self.tries = tries


class ZeroEvidence(ConfGraphError):
    """A conditional probability was requested on a zero-probability event."""


class GraphTooLarge(ConfGraphError):
    """The joint outcome space exceeds what the exact oracle will represent."""
