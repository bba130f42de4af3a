"""Exception taxonomy shared by every subsystem.

Each error carries a stable machine-readable ``code`` so the HTTP layer and
the CLI can map failures without string matching.
"""
from __future__ import annotations


class QfiError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ValidationError(QfiError):
    code = "validation_error"


class InvalidGateError(QfiError):
    code = "invalid_gate"


class CapacityError(QfiError):
    code = "capacity_exceeded"


class ConfigurationError(QfiError):
    code = "configuration_error"


class DeviceNotFoundError(QfiError):
    code = "device_not_found"


class DeviceUnavailableError(QfiError):
    code = "device_unavailable"


class InvalidRequestError(QfiError):
    code = "invalid_request"


class InsufficientEntropyError(QfiError):
    code = "insufficient_entropy"


class KeyExhaustedError(QfiError):
    code = "key_exhausted"


class ReuseForbiddenError(QfiError):
    code = "reuse_forbidden"


class InvalidTransitionError(QfiError):
    code = "invalid_transition"


class ConsentRequiredError(QfiError):
    code = "consent_required"


class InvalidStateError(QfiError):
    code = "invalid_state"


class AlreadySubmittedError(QfiError):
    code = "already_submitted"


class NotFoundError(QfiError):
    code = "not_found"


class ChainCorruptError(QfiError):
    code = "chain_corrupt"


class StorageError(QfiError):
    code = "io_error"
