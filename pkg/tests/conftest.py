"""Shared test doubles: a scripted hardware boundary for the controller core
and scripted byte streams for the host driver."""

from __future__ import annotations

from collections import deque

from memswitch.controller import HIGH


class FakeBoundary:
    """Hardware boundary with a scriptable ADC and full effect recording.

    adc can be an int (constant), a list (consumed per read, then falls back
    to adc_default), or a callable taking the 1-based read index.
    """

    def __init__(self, adc=0):
        self.t = 0.0
        if callable(adc):
            self.adc_fn = adc
            self.adc_queue, self.adc_default = deque(), 0
        elif isinstance(adc, int):
            self.adc_fn = None
            self.adc_queue, self.adc_default = deque(), adc
        else:
            self.adc_fn = None
            self.adc_queue, self.adc_default = deque(adc), 0
        self.reads = 0
        self.lines: dict[int, str] = {}
        self.line_log: list[tuple[float, int, str]] = []
        self.frames: list = []
        self.written = bytearray()
        self.inbound: deque[int] = deque()

    def feed(self, data: bytes) -> None:
        self.inbound.extend(data)

    def high_lines(self) -> frozenset[int]:
        return frozenset(l for l, v in self.lines.items() if v == HIGH)

    # HardwareBoundary contract

    def read_adc(self) -> int:
        self.reads += 1
        if self.adc_fn is not None:
            return self.adc_fn(self.reads)
        if self.adc_queue:
            return self.adc_queue.popleft()
        return self.adc_default

    def write_line(self, line: int, level: str) -> None:
        self.lines[line] = level
        self.line_log.append((self.t, line, level))

    def show_frame(self, frame) -> None:
        self.frames.append(frame)

    def now_ms(self) -> float:
        return self.t

    def serial_read(self):
        return self.inbound.popleft() if self.inbound else None

    def serial_write(self, data: bytes) -> None:
        self.written.extend(data)

    def sleep_ms(self, ms: float) -> None:
        self.t += ms


class ScriptedStream:
    """In-memory ByteStream acting as a canned instrument.

    extended=True answers '?' with the current S-line and tracks digit
    selections, like firmware with the protocol extensions; otherwise the
    device is perfectly silent.
    """

    def __init__(self, extended: bool = False, selected: int = 0):
        self.extended = extended
        self.selected = selected
        self.written = bytearray()
        self._rx = bytearray()
        self.closed = False

    def write(self, data: bytes) -> None:
        self.written.extend(data)
        for b in data:
            if 0x31 <= b <= 0x39:
                self.selected = b - 0x30
                continue
            if b == 0x3F and self.extended:
                self._rx.extend(b"S%d\n" % self.selected)

    def read_some(self, timeout_s: float) -> bytes:
        data = bytes(self._rx)
        del self._rx[:]
        return data

    def push(self, data: bytes) -> None:
        """Unsolicited device-to-host bytes (e.g. E-lines)."""
        self._rx.extend(data)

    def close(self) -> None:
        self.closed = True
