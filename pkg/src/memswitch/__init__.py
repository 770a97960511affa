"""Host tooling and hardware-in-the-loop simulator for a MEMS RF switch
controller: the firmware control loop, switch network topologies, an
electrical device model, and a driver with CLI and HTTP front ends.
"""

from .errors import (
    BindFailed,
    Busy,
    ButtonOutOfRange,
    ConfigInvalid,
    ConnectFailed,
    EndpointUnavailable,
    ParseError,
    PortOutOfRange,
    ReadTimeout,
    SwitchError,
    UnknownLine,
    ValidationError,
    WriteFailed,
)
from .ladder import (
    LadderConfig,
    ThresholdTable,
    build_thresholds,
    decode_button,
    format_threshold_table,
    nominal_voltage,
    voltage_to_code,
)
from .topology import (
    Topology,
    builtin_presets,
    get_preset,
    lines_for_port,
    load_topology,
    serialize,
)
from .controller import (
    ControllerState,
    HardwareBoundary,
    initial_state,
    parse_serial_byte,
    tick,
)
from .simulator import (
    SimulatorHarness,
    TraceRecorder,
    VirtualDevice,
)
from .host import DeviceState, Endpoint, Session, connect, parse_endpoint
from .api import create_app, serve_api

__version__ = "0.1.0"

__all__ = [
    "BindFailed",
    "Busy",
    "ButtonOutOfRange",
    "ConfigInvalid",
    "ConnectFailed",
    "ControllerState",
    "DeviceState",
    "Endpoint",
    "EndpointUnavailable",
    "HardwareBoundary",
    "LadderConfig",
    "ParseError",
    "PortOutOfRange",
    "ReadTimeout",
    "Session",
    "SimulatorHarness",
    "SwitchError",
    "ThresholdTable",
    "Topology",
    "TraceRecorder",
    "UnknownLine",
    "ValidationError",
    "VirtualDevice",
    "WriteFailed",
    "build_thresholds",
    "builtin_presets",
    "connect",
    "create_app",
    "decode_button",
    "format_threshold_table",
    "get_preset",
    "initial_state",
    "lines_for_port",
    "load_topology",
    "nominal_voltage",
    "parse_endpoint",
    "parse_serial_byte",
    "serialize",
    "serve_api",
    "tick",
    "voltage_to_code",
    "__version__",
]
