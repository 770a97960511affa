"""Exception types shared across the package."""


class SwitchError(Exception):
    """Base class for all memswitch errors."""


class ConfigInvalid(SwitchError):
    """A ladder configuration cannot produce a decodable threshold table."""


class PortOutOfRange(SwitchError):
    """Port index outside 1..n_ports for the active topology."""


class ButtonOutOfRange(SwitchError):
    """Button index outside 1..n_buttons for the ladder."""


class UnknownLine(SwitchError):
    """Control line id not present in the active topology."""


class ParseError(SwitchError):
    """Topology document is malformed (bad JSON or wrong shape)."""


class ValidationError(SwitchError):
    """Topology document parsed but violates an invariant."""


class ConnectFailed(SwitchError):
    """Endpoint could not be opened."""


class Busy(SwitchError):
    """Device endpoint is already attached to another client."""


class WriteFailed(SwitchError):
    """Byte could not be written to the device."""


class ReadTimeout(SwitchError):
    """Device did not reply within the bounded interval."""


class EndpointUnavailable(SwitchError):
    """Requested listen address cannot be used."""


class BindFailed(SwitchError):
    """HTTP service address cannot be bound."""
