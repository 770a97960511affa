"""Deterministic controller core: button decode, serial protocol, exclusive
port selection, LED indication.

The core is a pure state machine. Every effect (line writes, LED frames,
serial replies) flows through the HardwareBoundary the host provides, so the
same code drives real I/O and the electrical simulator. One call to tick()
is one loop iteration: drain serial, poll the buttons, apply the winning
selection.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Protocol, runtime_checkable

from .errors import PortOutOfRange
from .ladder import ThresholdTable, decode_button
from .topology import Topology, lines_for_port

LOW = "low"
HIGH = "high"

LED_OFF = (0, 0, 0)
LED_SELECTED = (0, 255, 0)

DEFAULT_DEBOUNCE_MS = 1.0

# A frame is one (r, g, b) triple per panel LED, in daisy-chain order.
PixelFrame = tuple[tuple[int, int, int], ...]


def frame_all_off(n_pixels: int) -> PixelFrame:
    return (LED_OFF,) * n_pixels


def frame_single_lit(n_pixels: int, index: int, color=LED_SELECTED) -> PixelFrame:
    return tuple(color if i == index else LED_OFF for i in range(n_pixels))


def lit_pixels(frame: PixelFrame) -> list[int]:
    return [i for i, px in enumerate(frame) if px != LED_OFF]


# -- commands ----------------------------------------------------------------

@dataclass(frozen=True)
class Select:
    port: int


@dataclass(frozen=True)
class Query:
    pass


@dataclass(frozen=True)
class Noop:
    pass


Command = Select | Query | Noop


# -- output actions ----------------------------------------------------------

@dataclass(frozen=True)
class SetLine:
    line: int
    level: str  # LOW | HIGH


@dataclass(frozen=True)
class ShowFrame:
    frame: PixelFrame


@dataclass(frozen=True)
class SerialWrite:
    data: bytes


OutputAction = SetLine | ShowFrame | SerialWrite


@runtime_checkable
class HardwareBoundary(Protocol):
    """What the core requires of its host, real or simulated.

    read_adc returns codes in [0, 2^adc_bits - 1]; now_ms is non-decreasing.
    A boundary may additionally provide sleep_ms(ms); otherwise the core
    busy-waits on now_ms for the debounce delay.
    """

    def read_adc(self) -> int: ...
    def write_line(self, line: int, level: str) -> None: ...
    def show_frame(self, frame: PixelFrame) -> None: ...
    def now_ms(self) -> float: ...
    def serial_read(self) -> int | None: ...
    def serial_write(self, data: bytes) -> None: ...


@dataclass(frozen=True)
class ControllerState:
    """Instrument state: current selection and its visible consequences."""

    selected: int | None
    energized_lines: frozenset[int]
    led_frame: PixelFrame
    extensions_enabled: bool = False


def initial_state(topology: Topology, extensions: bool = False) -> ControllerState:
    """Power-up state: nothing selected, all lines low, LEDs dark."""
    return ControllerState(
        selected=None,
        energized_lines=frozenset(),
        led_frame=frame_all_off(topology.n_ports),
        extensions_enabled=extensions,
    )


def parse_serial_byte(b: int, n_ports: int, extensions: bool) -> Command:
    """One byte of host protocol: digit = select, '?' = query, rest ignored.

    The protocol is single ASCII digits, so at most ports 1..9 are
    addressable even on larger networks. Unknown bytes are Noop by design;
    the device never complains.
    """
    top = min(n_ports, 9)
    if 0x31 <= b <= 0x30 + top:
        return Select(b - 0x30)
    if b == 0x3F and extensions:
        return Query()
    return Noop()


def render_state_line(state: ControllerState) -> bytes:
    """Status reply: "S<n>\\n" with n=0 when nothing is selected."""
    return b"S%d\n" % (state.selected or 0)


def apply_selection(
    state: ControllerState,
    topology: Topology,
    port: int,
    *,
    selected_color=LED_SELECTED,
) -> tuple[ControllerState, list[OutputAction]]:
    """Switch the selection, break-before-make.

    Re-selecting the current port is a no-op with an empty action list, so
    a held button or repeated serial command never glitches the HV lines.
    Otherwise every currently energized line is driven low before any new
    line is driven high, then the LED frame is updated.
    """
    if not 1 <= port <= topology.n_ports:
        raise PortOutOfRange("port %d not in 1..%d" % (port, topology.n_ports))
    if state.selected == port:
        return state, []

    new_lines = lines_for_port(topology, port)
    actions: list[OutputAction] = []
    for line in sorted(state.energized_lines):
        actions.append(SetLine(line, LOW))
    for line in sorted(new_lines):
        actions.append(SetLine(line, HIGH))
    frame = frame_single_lit(
        topology.n_ports, topology.port_pixel[port], selected_color
    )
    actions.append(ShowFrame(frame))
    new_state = replace(
        state, selected=port, energized_lines=new_lines, led_frame=frame
    )
    return new_state, actions


def poll_buttons(
    hw: HardwareBoundary,
    table: ThresholdTable,
    *,
    debounce_ms: float = DEFAULT_DEBOUNCE_MS,
) -> int | None:
    """Two-sample debounced button read.

    Returns a button index only when two decodes separated by the debounce
    delay agree; a no-press first sample returns immediately without the
    second read.
    """
    first = decode_button(table, hw.read_adc())
    if first is None:
        return None
    _wait(hw, debounce_ms)
    second = decode_button(table, hw.read_adc())
    return first if first == second else None


def _wait(hw: HardwareBoundary, ms: float) -> None:
    sleep = getattr(hw, "sleep_ms", None)
    if sleep is not None:
        sleep(ms)
        return
    deadline = hw.now_ms() + ms
    while hw.now_ms() < deadline:
        pass


def execute(hw: HardwareBoundary, actions: Iterable[OutputAction]) -> None:
    """Replay an action trace onto a hardware boundary."""
    for action in actions:
        if isinstance(action, SetLine):
            hw.write_line(action.line, action.level)
        elif isinstance(action, ShowFrame):
            hw.show_frame(action.frame)
        elif isinstance(action, SerialWrite):
            hw.serial_write(action.data)


def tick(
    hw: HardwareBoundary,
    state: ControllerState,
    topology: Topology,
    table: ThresholdTable,
    *,
    debounce_ms: float = DEFAULT_DEBOUNCE_MS,
    selected_color=LED_SELECTED,
) -> ControllerState:
    """One pass of the main loop; malformed input cannot fault it.

    Serial bytes are drained first (last Select wins, queries answered with
    the selection that is about to take effect), then the panel buttons are
    polled; a confirmed press has final say within the tick. In extended
    mode a selection change that came from the panel is announced with an
    unsolicited "E<n>" line so attached hosts stay current.
    """
    pending = state.selected
    replies: list[bytes] = []

    while (b := hw.serial_read()) is not None:
        cmd = parse_serial_byte(b, topology.n_ports, state.extensions_enabled)
        if isinstance(cmd, Select):
            pending = cmd.port
        elif isinstance(cmd, Query):
            replies.append(b"S%d\n" % (pending or 0))

    button = poll_buttons(hw, table, debounce_ms=debounce_ms)
    from_button = False
    if button is not None:
        port = topology.button_port[button]
        if port != pending:
            pending = port
            from_button = True

    for data in replies:
        hw.serial_write(data)

    if pending is None or pending == state.selected:
        return state

    new_state, actions = apply_selection(
        state, topology, pending, selected_color=selected_color
    )
    execute(hw, actions)
    if from_button and state.extensions_enabled:
        hw.serial_write(b"E%d\n" % new_state.selected)
    return new_state
