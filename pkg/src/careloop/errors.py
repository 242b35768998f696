"""Exception hierarchy shared across the platform.

Service-level API error codes map onto these exception types; library code
raises them directly.
"""

from __future__ import annotations


class CareloopError(Exception):
    """Base class for all domain errors."""


class InvalidScriptError(CareloopError):
    """An edit script references anchors that are invalid for its draft."""


class NotRepresentableError(CareloopError):
    """A rewriting cannot be expressed with Insert/Replace actions only."""


class SafetyRejectedError(CareloopError):
    """Content was rejected by the crisis-safety filter."""


class NoImprovementError(CareloopError):
    """The feedback backend exhausted its retry budget without producing a
    candidate that strictly improves the draft's empathy score."""


class BackendUnavailableError(CareloopError):
    """A remote model backend could not be reached."""


class ContractViolationError(CareloopError):
    """A remote backend returned data violating its wire contract."""


class PhaseViolationError(CareloopError):
    """An operation was attempted in the wrong study phase or arm."""


class NotFoundError(CareloopError):
    """A referenced entity does not exist (or is gated for this arm)."""


class ValidationError(CareloopError):
    """Request or configuration data failed validation."""


class DomainError(CareloopError):
    """A numeric argument is outside its mathematical domain."""
