"""Exception hierarchy shared by the library and the CLI."""


class UqcpacError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(UqcpacError, ValueError):
    """An argument is outside the operation's domain."""


class ResourceError(UqcpacError):
    """The request would exceed a configured memory cap."""


class CapacityError(UqcpacError):
    """A circuit needs more ansatz layers than the budget allows."""

    def __init__(self, message, required_layers=None):
        super().__init__(message)
        self.required_layers = required_layers


class ParseError(UqcpacError, ValueError):
    """A circuit, parameter or dataset file is malformed."""

    def __init__(self, message, field=None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
