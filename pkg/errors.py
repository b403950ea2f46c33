"""
Exception hierarchy shared by every role of the messaging system.
"""

from typing import Optional


class CmxError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CmxError, ValueError):
    """A configuration value is missing or out of range."""


class UsageError(CmxError):
    """Command-line usage error."""


# ==================== CODEC ====================
class CodecError(CmxError):
    pass


class CapacityOverflowError(CodecError):
    """A buffer would grow beyond its configured absolute maximum."""


class BufferContractError(CodecError):
    """A buffer operation was called with its precondition unmet."""


class MalformedStreamError(CodecError):
    """A token stream cannot be decoded."""


class BadMagicError(MalformedStreamError):
    pass


class TruncatedStreamError(MalformedStreamError):
    pass


class TokenInvariantError(MalformedStreamError):
    pass


# ==================== ENVELOPE ====================
class EnvelopeError(CmxError):
    pass


class NotXmlError(EnvelopeError):
    pass


class MissingEnvelopeElementError(EnvelopeError):
    pass


class UnknownBodyElementError(EnvelopeError):
    pass


class Base64DecodeError(EnvelopeError):
    pass


class InvalidBase64CharacterError(Base64DecodeError):
    pass


class BadBase64PaddingError(Base64DecodeError):
    pass


class PayloadNotRepresentableError(EnvelopeError):
    """Plain payload bytes cannot be carried as XML character data."""


class WsdlError(EnvelopeError):
    pass


# ==================== BROKER ====================
class RegistryValidationError(CmxError, ValueError):
    pass


class ServiceNotFoundError(CmxError, LookupError):
    def __init__(self, service_name: str):
        super().__init__(f"service not found: {service_name}")
        self.service_name = service_name


class BrokerUnavailableError(CmxError):
    pass


# ==================== TRANSPORT ====================
class TransportError(CmxError):
    pass


class TransportTimeoutError(TransportError):
    pass


class ConnectFailureError(TransportError):
    pass


class SoapProtocolError(TransportError):
    def __init__(self, status: int, message: str = ""):
        super().__init__(message or f"unexpected HTTP status {status}")
        self.status = status


class BodyEncodingError(TransportError):
    pass


class PortInUseError(TransportError):
    pass


# ==================== PROVIDER ====================
class ProviderStartupError(CmxError):
    pass


class UnknownTemplateError(CmxError, ValueError):
    pass


# ==================== CONSUMER ====================
class FaultReceivedError(CmxError):
    def __init__(self, faultcode: str, reason: str = ""):
        super().__init__(f"fault received: {faultcode}: {reason}")
        self.faultcode = faultcode
        self.reason = reason


class SizeMismatchError(CmxError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"decompressed {actual} bytes, envelope declared {expected}")
        self.expected = expected
        self.actual = actual


class TransactionError(CmxError):
    """A consumer transaction failed; ``stage`` names where."""

    def __init__(self, stage: str, cause: Optional[BaseException] = None):
        super().__init__(f"transaction failed at {stage}: {cause}")
        self.stage = stage
        self.cause = cause


# ==================== BENCH ====================
class EmptyReportError(CmxError, ValueError):
    """A report was requested for zero rows."""
