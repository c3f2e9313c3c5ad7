"""Exception types shared across the toolkit."""

from __future__ import annotations


class PiforgeError(Exception):
    """Base class for all toolkit errors."""


class UnknownUnitToken(PiforgeError):
    pass


class MalformedUnitExpression(PiforgeError):
    pass


class IncompatibleDimensions(PiforgeError):
    pass


class UnresolvedReference(PiforgeError):
    pass


class InvalidThreshold(PiforgeError):
    pass


class StaleDecision(PiforgeError):
    pass


class ConflictingDecisions(PiforgeError):
    pass


class UnknownProposal(PiforgeError):
    pass


class RoleViolation(PiforgeError):
    pass


class UnknownNode(PiforgeError):
    pass


class IllegalEdgeKind(PiforgeError):
    pass


class UnhostedFunction(PiforgeError):
    pass


class DigestMismatch(PiforgeError):
    pass


class IncompleteItemDefinition(PiforgeError):
    pass


class WrongPhase(PiforgeError):
    pass


class UnknownConflict(PiforgeError):
    pass


class InvalidResolution(PiforgeError):
    pass


class InvalidProposal(PiforgeError):
    """A submitted PI carries error-severity diagnostics."""

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class PortUnavailable(PiforgeError):
    pass


class UninitializedProject(PiforgeError):
    pass
