"""Exception hierarchy shared across the platform."""

from __future__ import annotations


class TelemonError(Exception):
    """Base class for all platform errors."""


class UnknownKindError(TelemonError):
    """Parameter kind is not present in the catalog."""


class InvalidWindowError(TelemonError):
    """Time window has start >= end."""


class InvalidSampleError(TelemonError):
    """A sample that should have been rejected reached storage."""


class TargetNotFoundError(TelemonError):
    """Note target sample does not exist."""


class WrongKeyError(TelemonError):
    """Authenticated decryption failed: wrong key or tampered field."""


class CorruptFieldError(TelemonError):
    """Encrypted field is structurally invalid."""


class MissingKeyError(TelemonError):
    """No encryption key configured."""


class MalformedTopicError(TelemonError):
    """Topic does not match vitals/<device_id>/<sensor>."""


class MalformedBodyError(TelemonError):
    """Payload is not valid JSON of the telemetry schema."""


class UnknownDeviceError(TelemonError):
    """Device id is not registered to any patient."""


class UnitMismatchError(MalformedBodyError):
    """Payload unit differs from the canonical unit of the mapped kind."""


class BrokerUnreachableError(TelemonError):
    """Broker refused the connection or is down."""


class EmptyWindowError(TelemonError):
    """Operation requires at least one sample in the window."""


class InsufficientDataError(TelemonError):
    """Not enough samples for the requested statistic."""


class InsufficientBaselineError(TelemonError):
    """No bucket in the window has a computable trailing baseline."""


class MalformedResponseError(TelemonError):
    """Questionnaire response violates the 10-items-in-1..5 shape."""


class InvalidCodeError(TelemonError):
    """Authorization code rejected by the token endpoint."""


class ServerUnreachableError(TelemonError):
    """Remote data source unreachable after bounded retries."""


class RefreshRejectedError(TelemonError):
    """Refresh token revoked; account needs re-linking."""


class UnmappedRemoteTypeError(TelemonError):
    """Remote datapoint type has no catalog mapping."""
