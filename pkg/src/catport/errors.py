"""Exception hierarchy shared by every catport module."""


class CatportError(Exception):
    """Base class for all errors raised by catport."""


class CompositionError(CatportError):
    """Raised when states cannot be combined (e.g. duplicate qubit labels)."""


class AddressingError(CatportError, KeyError):
    """Raised when a qubit label is not present in a state."""


class BasisError(CatportError):
    """Raised when a measurement basis is not orthonormal or has the wrong size."""


class DomainError(CatportError, ValueError):
    """Raised when an argument is outside the domain of an operation."""


class ConfigurationError(CatportError, ValueError):
    """Raised for inconsistent protocol inputs, channels or scenarios."""


class ProtocolFailure(CatportError):
    """Raised when a branch that the protocol declares unreachable is requested."""


class DegenerateChannelError(ConfigurationError):
    """Raised when a weighted channel carries no entanglement (a*b == 0)."""


class LocalityError(CatportError):
    """Raised when a protocol step violates the LOCC discipline.

    The offending step is kept on ``event`` for diagnostics.
    """

    def __init__(self, message, event=None):
        super().__init__(message)
        self.event = event
