"""Exception hierarchy shared by every layer of the package."""


class SansError(Exception):
    """Base class for all errors raised by :mod:`sans`."""


# primitives
class EncodingError(SansError, ValueError):
    """A byte string is not the canonical encoding of the expected object."""


class EmptyInput(SansError, ValueError):
    pass


class ArityTooLarge(SansError, ValueError):
    pass


class MalformedPoint(EncodingError):
    """Point is off the embedded curve or outside its prime-order subgroup."""


class RngFailure(SansError, RuntimeError):
    pass


# circuit
class ParameterUnavailable(SansError, RuntimeError):
    pass


class MalformedCredential(EncodingError):
    pass


class DimensionMismatch(SansError, ValueError):
    pass


# proof system and file formats
class MalformedProof(EncodingError):
    pass


class FormatError(EncodingError):
    """Base for versioned-container decoding failures."""


class BadMagic(FormatError):
    pass


class UnsupportedVersion(FormatError):
    pass


class TruncatedData(FormatError):
    pass


class FingerprintMismatch(SansError, ValueError):
    pass


class ProvingFailure(SansError, RuntimeError):
    pass


# protocol
class RequirementsNotMet(SansError):
    pass


class ClockError(SansError, RuntimeError):
    pass


# wire
class TransportError(SansError, ConnectionError):
    pass


class ServerRejected(SansError):
    """The operator answered a request with an ERR message."""

    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


class Rejected(ServerRejected):
    """The operator refused an authentication request."""


class InvalidIssuedCredential(SansError):
    """The operator's signature on a freshly issued credential does not verify."""


class BindFailure(TransportError):
    pass


class ProtocolViolation(SansError, ValueError):
    """A frame or message breaks the wire format; ``code`` goes into the ERR reply."""

    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail
