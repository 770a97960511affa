"""Host-side driver for the switch controller.

A Session owns one byte link to the instrument (real serial port or TCP
bridge) and tracks the selected port. Firmware with the protocol
extensions answers a '?' probe with its state and announces front-panel
changes; stock firmware says nothing, so the session falls back to a
shadow register that mirrors what we last commanded.

All session methods are thread-safe behind one lock: exactly one writer
talks to the instrument at a time.
"""

from __future__ import annotations

import os
import select
import socket
import termios
import threading
import time
from dataclasses import dataclass
from typing import Protocol

from .errors import (
    ConnectFailed,
    EndpointUnavailable,
    ParseError,
    PortOutOfRange,
    ReadTimeout,
    WriteFailed,
)

DEFAULT_BAUD = 9600
PROBE_TIMEOUT_S = 0.2
REPLY_TIMEOUT_S = 1.0

# Selection digits '1'..'9'; the wire protocol has no room for more.
MAX_WIRE_PORT = 9


@dataclass(frozen=True)
class Endpoint:
    """Parsed form of `serial:<device>[:baud]` or `tcp:<host>:<port>`."""

    scheme: str
    target: str
    param: int

    def __str__(self) -> str:
        return "%s:%s:%d" % (self.scheme, self.target, self.param)


def parse_endpoint(text: str) -> Endpoint:
    scheme, sep, rest = text.partition(":")
    if not sep or not rest:
        raise ParseError("endpoint %r: expected serial:<dev>[:baud] or tcp:<host>:<port>" % text)
    if scheme == "serial":
        dev, sep, tail = rest.rpartition(":")
        if sep and tail.isdigit():
            return Endpoint("serial", dev, int(tail))
        return Endpoint("serial", rest, DEFAULT_BAUD)
    if scheme == "tcp":
        host, sep, port = rest.rpartition(":")
        if not sep or not port.isdigit():
            raise ParseError("endpoint %r: tcp needs <host>:<port>" % text)
        return Endpoint("tcp", host, int(port))
    raise ParseError("endpoint %r: unknown scheme %r" % (text, scheme))


class ByteStream(Protocol):
    def read_some(self, timeout_s: float) -> bytes: ...

    def write(self, data: bytes) -> None: ...

    def close(self) -> None: ...


class TcpStream:
    def __init__(self, host: str, port: int):
        try:
            self._sock = socket.create_connection((host, port), timeout=2.0)
        except OSError as exc:
            raise ConnectFailed("cannot connect to %s:%d: %s" % (host, port, exc)) from exc
        self._sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self.eof = False

    def read_some(self, timeout_s: float) -> bytes:
        if self.eof:
            return b""
        self._sock.settimeout(max(timeout_s, 0.000001))
        try:
            data = self._sock.recv(4096)
        except socket.timeout:
            return b""
        except OSError as exc:
            raise EndpointUnavailable("link read failed: %s" % exc) from exc
        if not data:
            self.eof = True
        return data

    def write(self, data: bytes) -> None:
        try:
            self._sock.sendall(data)
        except OSError as exc:
            raise WriteFailed("link write failed: %s" % exc) from exc

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


_BAUD_CONSTANTS = {
    9600: termios.B9600,
    19200: termios.B19200,
    38400: termios.B38400,
    57600: termios.B57600,
    115200: termios.B115200,
}


class SerialStream:
    """Raw 8-N-1 serial port via termios; no flow control."""

    def __init__(self, device: str, baud: int = DEFAULT_BAUD):
        speed = _BAUD_CONSTANTS.get(baud)
        if speed is None:
            raise ConnectFailed("unsupported baud rate %d" % baud)
        try:
            self._fd = os.open(device, os.O_RDWR | os.O_NOCTTY | os.O_NONBLOCK)
        except OSError as exc:
            raise ConnectFailed("cannot open %s: %s" % (device, exc)) from exc
        try:
            attrs = termios.tcgetattr(self._fd)
            iflag, oflag, cflag, lflag, _, _, cc = attrs
            iflag = 0
            oflag = 0
            cflag = termios.CS8 | termios.CREAD | termios.CLOCAL
            lflag = 0
            cc = list(cc)
            cc[termios.VMIN] = 0
            cc[termios.VTIME] = 0
            termios.tcsetattr(
                self._fd, termios.TCSANOW, [iflag, oflag, cflag, lflag, speed, speed, cc]
            )
        except termios.error as exc:
            os.close(self._fd)
            raise ConnectFailed("cannot configure %s: %s" % (device, exc)) from exc

    def read_some(self, timeout_s: float) -> bytes:
        ready, _, _ = select.select([self._fd], [], [], max(timeout_s, 0.0))
        if not ready:
            return b""
        try:
            return os.read(self._fd, 4096)
        except BlockingIOError:
            return b""
        except OSError as exc:
            raise EndpointUnavailable("serial read failed: %s" % exc) from exc

    def write(self, data: bytes) -> None:
        view = memoryview(data)
        while view:
            try:
                n = os.write(self._fd, view)
            except BlockingIOError:
                select.select([], [self._fd], [], 0.1)
                continue
            except OSError as exc:
                raise WriteFailed("serial write failed: %s" % exc) from exc
            view = view[n:]

    def close(self) -> None:
        try:
            os.close(self._fd)
        except OSError:
            pass


def open_stream(endpoint: Endpoint) -> ByteStream:
    if endpoint.scheme == "tcp":
        return TcpStream(endpoint.target, endpoint.param)
    if endpoint.scheme == "serial":
        return SerialStream(endpoint.target, endpoint.param)
    raise ConnectFailed("unknown endpoint scheme %r" % endpoint.scheme)


@dataclass(frozen=True)
class DeviceState:
    """selected=None means no port routed. source says how we know:
    'queried' came from the instrument, 'shadow' is our local mirror."""

    selected: int | None
    source: str

    def as_dict(self) -> dict:
        return {"selected": self.selected, "source": self.source}


class Session:
    """One live link to the instrument, with protocol-capability handling."""

    def __init__(self, stream: ByteStream, mode: str):
        assert mode in ("extended", "legacy")
        self.stream = stream
        self.mode = mode
        self._lock = threading.RLock()
        self._rx = bytearray()
        self._events: list[tuple[str, int | None]] = []
        self._selected: int | None = None
        self._source = "shadow"

    # -- wire plumbing ---------------------------------------------------------

    def _pump(self, timeout_s: float = 0.0) -> None:
        data = self.stream.read_some(timeout_s)
        if data:
            self._rx.extend(data)
        while b"\n" in self._rx:
            raw, _, rest = bytes(self._rx).partition(b"\n")
            self._rx = bytearray(rest)
            self._take_line(raw.strip().decode("ascii", "replace"))

    def _take_line(self, line: str) -> None:
        if len(line) >= 2 and line[0] in "SE" and line[1:].isdigit():
            port = int(line[1:]) or None
            self._selected = port
            self._source = "queried"
            kind = "status" if line[0] == "S" else "external"
            self._events.append((kind, port))
        # Anything else is noise on the line; drop it.

    def _await_status(self, timeout_s: float) -> int | None:
        deadline = time.monotonic() + timeout_s
        while True:
            before = len(self._events)
            self._pump(timeout_s=0.02)
            for kind, port in self._events[before:]:
                if kind == "status":
                    return port
            if time.monotonic() >= deadline:
                raise ReadTimeout("no status reply within %.0f ms" % (timeout_s * 1000))

    # -- public API --------------------------------------------------------------

    def select_port(self, port: int) -> DeviceState:
        """Command a selection. Always writes exactly one digit byte; in
        extended mode a confirming query follows as a separate exchange."""
        if not 1 <= port <= MAX_WIRE_PORT:
            raise PortOutOfRange("port %d not in 1..%d" % (port, MAX_WIRE_PORT))
        with self._lock:
            self._pump()
            self.stream.write(bytes([0x30 + port]))
            if self.mode == "extended":
                self.stream.write(b"?")
                confirmed = self._await_status(REPLY_TIMEOUT_S)
                return DeviceState(confirmed, "queried")
            self._selected = port
            self._source = "shadow"
            return DeviceState(port, "shadow")

    def query_state(self) -> DeviceState:
        with self._lock:
            if self.mode != "extended":
                return self.get_state()
            self._pump()
            self.stream.write(b"?")
            port = self._await_status(REPLY_TIMEOUT_S)
            return DeviceState(port, "queried")

    def get_state(self) -> DeviceState:
        with self._lock:
            self._pump()
            return DeviceState(self._selected, self._source)

    def poll_events(self, timeout_s: float = 0.0) -> list[tuple[str, int | None]]:
        """Drain unsolicited change notifications (empty list on legacy links)."""
        with self._lock:
            self._pump(timeout_s)
            events, self._events = self._events, []
            return [e for e in events if e[0] == "external"]

    def close(self) -> None:
        self.stream.close()


def connect(
    target: Endpoint | str | ByteStream,
    *,
    extensions: str = "auto",
    probe_timeout_s: float = PROBE_TIMEOUT_S,
) -> Session:
    """Open a session.

    extensions='auto' probes with '?' and falls back to legacy after
    probe_timeout_s of silence. 'on' demands a reply; 'off' skips the probe
    entirely and leaves the wire untouched until the first command.
    """
    if extensions not in ("auto", "on", "off"):
        raise ValueError("extensions must be auto, on or off")
    if isinstance(target, str):
        target = parse_endpoint(target)
    stream = open_stream(target) if isinstance(target, Endpoint) else target

    if extensions == "off":
        return Session(stream, "legacy")

    session = Session(stream, "extended")
    stream.write(b"?")
    try:
        port = session._await_status(probe_timeout_s)
    except ReadTimeout:
        if extensions == "on":
            stream.close()
            raise ConnectFailed(
                "device did not answer the capability probe"
            ) from None
        return Session(stream, "legacy")
    session._selected = port
    session._source = "queried"
    return session
