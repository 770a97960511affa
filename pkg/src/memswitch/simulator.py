"""Electrical hardware-in-the-loop model of the switch controller.

VirtualDevice models the plant: the button ladder feeding one ADC pin,
relays with actuation delay gating a high-voltage rail onto DSUB pins, and
the switch gates behind those pins with their actuation threshold. The
device only moves when step() advances its clock, so identical event
scripts replay bit-identically.

SimulatedBoundary adapts the device to the controller core's hardware
contract, and SimulatorHarness wires core + device into a steppable
instrument for tests and the CLI.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .controller import (
    HIGH,
    ControllerState,
    PixelFrame,
    frame_all_off,
    initial_state,
    tick,
    LED_SELECTED,
)
from .errors import ButtonOutOfRange, UnknownLine
from .ladder import (
    LadderConfig,
    ThresholdTable,
    build_thresholds,
    nominal_voltage,
    voltage_to_code,
)
from .topology import Topology

DEFAULT_HV_RAIL_VOLTS = 90.0
DEFAULT_RELAY_DELAY_MS = 1.0
DEFAULT_MEMS_THRESHOLD_VOLTS = 85.0
DEFAULT_TICK_MS = 1.0

# 9600 baud, 8-N-1: 10 bit times per byte.
PACE_MS_AT_9600 = 10_000.0 / 9600.0


def default_ladder(topology: Topology, vcc_volts: float = 5.0) -> LadderConfig:
    return LadderConfig(
        vcc_volts=vcc_volts, vref_volts=5.0, n_buttons=topology.n_ports
    )


class TraceRecorder:
    """Machine-readable event log: one `t_ms kind payload` line per event."""

    def __init__(self, sink=None):
        self.events: list[tuple[float, str, dict]] = []
        self._sink = sink

    def record(self, t_ms: float, kind: str, **payload) -> None:
        self.events.append((t_ms, kind, payload))
        if self._sink is not None:
            self._sink.write(self.format_event(t_ms, kind, payload) + "\n")

    @staticmethod
    def format_event(t_ms: float, kind: str, payload: dict) -> str:
        return "%.3f %s %s" % (t_ms, kind, json.dumps(payload, sort_keys=True))

    def lines(self) -> list[str]:
        return [self.format_event(t, k, p) for t, k, p in self.events]

    def of_kind(self, kind: str) -> list[tuple[float, dict]]:
        return [(t, p) for t, k, p in self.events if k == kind]


@dataclass
class RelayModel:
    """Reed relay: the contact follows the coil after the actuation delay.

    A coil that reverts before the delay elapses never moves the contact.
    """

    actuation_delay_ms: float = DEFAULT_RELAY_DELAY_MS
    coil_energized: bool = False
    contact_closed: bool = False
    coil_changed_at_ms: float = 0.0

    def due(self, now_ms: float) -> bool:
        return (
            self.contact_closed != self.coil_energized
            and now_ms - self.coil_changed_at_ms >= self.actuation_delay_ms
        )


@dataclass
class MemsChannel:
    """One switch gate: conducts while its gate pin sits at or above threshold."""

    gate_line: int
    threshold_volts: float = DEFAULT_MEMS_THRESHOLD_VOLTS
    conducting: bool = False


@dataclass
class DeviceSnapshot:
    clock_ms: float
    buttons_down: frozenset[int]
    led_frame: PixelFrame
    pin_volts: dict[int, float]
    contacts_closed: frozenset[int]
    conducting_lines: frozenset[int]
    conducting_ports: frozenset[int]


class VirtualDevice:
    """The simulated instrument plus the cryostat-side switch gates."""

    def __init__(
        self,
        topology: Topology,
        ladder: LadderConfig | None = None,
        *,
        hv_rail_volts: float = DEFAULT_HV_RAIL_VOLTS,
        relay_delay_ms: float = DEFAULT_RELAY_DELAY_MS,
        mems_threshold_volts: float = DEFAULT_MEMS_THRESHOLD_VOLTS,
        adc_noise_counts: int = 0,
        seed: int = 0,
        trace: TraceRecorder | None = None,
    ):
        self.topology = topology
        self.ladder = ladder or default_ladder(topology)
        self.hv_rail_volts = hv_rail_volts
        self.adc_noise_counts = adc_noise_counts
        self.clock_ms = 0.0
        self.trace = trace
        self._rng = random.Random(seed)

        # Direct drive has no relay between the output and the pin; model it
        # as a zero-delay relay so the pin still updates on the next step.
        delay = 0.0 if topology.drive_mode == "direct" else relay_delay_ms
        self.relays = {
            line: RelayModel(actuation_delay_ms=delay)
            for line in sorted(topology.lines)
        }
        self.pin_volts = {pin: 0.0 for pin in range(1, 26)}
        self.channels = [
            MemsChannel(gate_line=line, threshold_volts=mems_threshold_volts)
            for line in sorted(topology.lines)
        ]
        self.buttons_down: set[int] = set()
        self.led_frame: PixelFrame = frame_all_off(topology.n_ports)

    def _record(self, kind: str, **payload) -> None:
        if self.trace is not None:
            self.trace.record(self.clock_ms, kind, **payload)

    # -- panel ---------------------------------------------------------------

    def press_button(self, i: int) -> None:
        if not 1 <= i <= self.ladder.n_buttons:
            raise ButtonOutOfRange(
                "button %d not in 1..%d" % (i, self.ladder.n_buttons)
            )
        self.buttons_down.add(i)
        self._record("button", index=i, down=True)

    def release_button(self, i: int) -> None:
        if not 1 <= i <= self.ladder.n_buttons:
            raise ButtonOutOfRange(
                "button %d not in 1..%d" % (i, self.ladder.n_buttons)
            )
        self.buttons_down.discard(i)
        self._record("button", index=i, down=False)

    def sample_adc(self) -> int:
        """ADC read of the ladder pin right now.

        With several buttons chorded, the lowest index (highest tap voltage)
        dominates; a full parallel-network solution is deliberately out of
        scope. No button means the pull-down holds the pin at 0 V.
        """
        if self.buttons_down:
            volts = nominal_voltage(self.ladder, min(self.buttons_down))
        else:
            volts = 0.0
        code = voltage_to_code(self.ladder, volts)
        if self.adc_noise_counts > 0:
            code += self._rng.randint(-self.adc_noise_counts, self.adc_noise_counts)
        return min(max(code, 0), self.ladder.full_scale)

    # -- control lines and time ----------------------------------------------

    def write_line(self, line: int, level: str) -> None:
        relay = self.relays.get(line)
        if relay is None:
            raise UnknownLine("line %d not in topology %r" % (line, self.topology.name))
        energize = level == HIGH
        if relay.coil_energized != energize:
            relay.coil_energized = energize
            relay.coil_changed_at_ms = self.clock_ms
            self._record("coil", line=line, energized=energize)

    def show_frame(self, frame: PixelFrame) -> None:
        self.led_frame = frame
        self._record(
            "frame", lit=[i for i, px in enumerate(frame) if px != (0, 0, 0)]
        )

    def step(self, dt_ms: float) -> None:
        """Advance simulated time; commit due relay contacts, then recompute
        pin voltages and gate conduction."""
        if dt_ms <= 0:
            raise ValueError("dt_ms must be > 0")
        self.clock_ms += dt_ms

        due = [(line, r) for line, r in self.relays.items() if r.due(self.clock_ms)]
        # Openings first so a trace scan never sees two paths closed at once.
        due.sort(key=lambda item: item[1].coil_energized)
        for line, relay in due:
            relay.contact_closed = relay.coil_energized
            self._record("contact", line=line, closed=relay.contact_closed)
        self._recompute()

    def _recompute(self) -> None:
        for line, relay in self.relays.items():
            pin = self.topology.line_pin[line]
            self.pin_volts[pin] = (
                self.hv_rail_volts if relay.contact_closed else 0.0
            )
        for ch in self.channels:
            pin = self.topology.line_pin[ch.gate_line]
            conducting = self.pin_volts[pin] >= ch.threshold_volts
            if conducting != ch.conducting:
                ch.conducting = conducting
                self._record("mems", line=ch.gate_line, conducting=conducting)

    # -- observation -----------------------------------------------------------

    def conducting_lines(self) -> frozenset[int]:
        return frozenset(ch.gate_line for ch in self.channels if ch.conducting)

    def conducting_ports(self) -> frozenset[int]:
        """Ports whose complete line set conducts (both poles on dual builds)."""
        lit = self.conducting_lines()
        return frozenset(
            p for p, lines in self.topology.port_lines.items() if lines <= lit
        )

    def snapshot(self) -> DeviceSnapshot:
        return DeviceSnapshot(
            clock_ms=self.clock_ms,
            buttons_down=frozenset(self.buttons_down),
            led_frame=self.led_frame,
            pin_volts=dict(self.pin_volts),
            contacts_closed=frozenset(
                line for line, r in self.relays.items() if r.contact_closed
            ),
            conducting_lines=self.conducting_lines(),
            conducting_ports=self.conducting_ports(),
        )


class SimulatedBoundary:
    """Adapts a VirtualDevice to the controller core's hardware contract."""

    def __init__(self, device: VirtualDevice):
        self.device = device
        self._inbound: list[tuple[float, int]] = []
        self._outbound = bytearray()
        self._next_free_ms = 0.0

    def feed(self, data: bytes, pace_ms: float = 0.0) -> None:
        """Queue host bytes for the core.

        With pacing, consecutive bytes become visible one byte-time apart,
        mimicking the wire rate instead of arriving as one burst.
        """
        base = max(self._next_free_ms, self.device.clock_ms)
        for i, b in enumerate(data):
            at = base + i * pace_ms
            self._inbound.append((at, b))
            if self.device.trace is not None:
                self.device.trace.record(at, "serial-rx", byte=b)
        self._next_free_ms = base + len(data) * pace_ms

    def take_output(self) -> bytes:
        out = bytes(self._outbound)
        del self._outbound[:]
        return out

    # HardwareBoundary contract

    def read_adc(self) -> int:
        return self.device.sample_adc()

    def write_line(self, line: int, level: str) -> None:
        self.device.write_line(line, level)

    def show_frame(self, frame: PixelFrame) -> None:
        self.device.show_frame(frame)

    def now_ms(self) -> float:
        return self.device.clock_ms

    def serial_read(self) -> int | None:
        if self._inbound and self._inbound[0][0] <= self.device.clock_ms:
            return self._inbound.pop(0)[1]
        return None

    def serial_write(self, data: bytes) -> None:
        self._outbound.extend(data)
        self.device._record("serial-tx", data=data.decode("ascii", "replace"))

    def sleep_ms(self, ms: float) -> None:
        self.device.step(ms)


class SimulatorHarness:
    """Controller core running against the virtual device, one tick at a time."""

    def __init__(
        self,
        topology: Topology,
        *,
        ladder: LadderConfig | None = None,
        extensions: bool = False,
        tick_ms: float = DEFAULT_TICK_MS,
        debounce_ms: float = 1.0,
        selected_color=LED_SELECTED,
        trace: TraceRecorder | None = None,
        **device_kwargs,
    ):
        self.topology = topology
        self.device = VirtualDevice(
            topology, ladder, trace=trace, **device_kwargs
        )
        self.boundary = SimulatedBoundary(self.device)
        self.table: ThresholdTable = build_thresholds(self.device.ladder)
        self.state: ControllerState = initial_state(topology, extensions)
        self.tick_ms = tick_ms
        self.debounce_ms = debounce_ms
        self.selected_color = selected_color
        self.trace = trace

    def feed(self, data: bytes, pace_ms: float = 0.0) -> None:
        self.boundary.feed(data, pace_ms)

    def output(self) -> bytes:
        return self.boundary.take_output()

    def advance(self, ticks: int = 1) -> None:
        for _ in range(ticks):
            self.state = tick(
                self.boundary,
                self.state,
                self.topology,
                self.table,
                debounce_ms=self.debounce_ms,
                selected_color=self.selected_color,
            )
            self.device.step(self.tick_ms)

    def run_for(self, sim_ms: float) -> None:
        """Advance until at least sim_ms of simulated time has passed."""
        target = self.device.clock_ms + sim_ms
        while self.device.clock_ms < target:
            self.advance()

    def press_button(self, i: int) -> None:
        self.device.press_button(i)

    def release_button(self, i: int) -> None:
        self.device.release_button(i)
