"""Network plumbing for the simulated instrument.

VirtualSerialServer exposes the device's serial port as a TCP socket. Like
a physical serial port it admits exactly one endpoint: a second connection
attempt is refused while the first is attached.

SimulatorService owns the tick loop thread, moving bytes between the
socket and the simulated core and applying panel actions submitted from
other threads. ControlServer is a small line-oriented admin socket so
out-of-process tools (and the CLI user) can press virtual buttons and
inspect the device.
"""

from __future__ import annotations

import json
import socket
import threading
import time
from collections import deque
from concurrent.futures import Future

from .errors import BindFailed
from .simulator import SimulatorHarness


def _bind_listener(address: tuple[str, int]) -> socket.socket:
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind(address)
        sock.listen(4)
    except OSError as exc:
        sock.close()
        raise BindFailed("cannot listen on %s:%d: %s" % (*address, exc)) from exc
    sock.settimeout(0.2)
    return sock


class VirtualSerialServer:
    """One-client TCP server standing in for the instrument's serial port."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self._listener = _bind_listener((host, port))
        self.address = self._listener.getsockname()[:2]
        self._lock = threading.Lock()
        self._client: socket.socket | None = None
        self._rx = bytearray()
        self._closing = False
        self._accept_thread: threading.Thread | None = None

    def start(self) -> None:
        self._accept_thread = threading.Thread(
            target=self._accept_loop, name="serial-accept", daemon=True
        )
        self._accept_thread.start()

    def _accept_loop(self) -> None:
        while not self._closing:
            try:
                conn, _ = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            # A client that just hung up may not have been reaped yet; give
            # the reader thread a moment before refusing the newcomer, so
            # back-to-back sessions do not race the teardown.
            deadline = time.monotonic() + 0.25
            while self._occupied() and time.monotonic() < deadline:
                time.sleep(0.005)
            with self._lock:
                if self._client is not None:
                    # Port genuinely attached elsewhere; refuse.
                    conn.close()
                    continue
                conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
                self._client = conn
            threading.Thread(
                target=self._read_loop, args=(conn,), name="serial-read", daemon=True
            ).start()

    def _occupied(self) -> bool:
        with self._lock:
            return self._client is not None

    def _read_loop(self, conn: socket.socket) -> None:
        while True:
            try:
                data = conn.recv(4096)
            except OSError:
                data = b""
            if not data:
                break
            with self._lock:
                self._rx.extend(data)
        with self._lock:
            if self._client is conn:
                self._client = None
        conn.close()

    def recv_pending(self) -> bytes:
        with self._lock:
            data = bytes(self._rx)
            del self._rx[:]
        return data

    def send(self, data: bytes) -> None:
        """Transmit device bytes; with no endpoint attached they fall on the
        floor, exactly like an unread UART."""
        with self._lock:
            conn = self._client
        if conn is None:
            return
        try:
            conn.sendall(data)
        except OSError:
            with self._lock:
                if self._client is conn:
                    self._client = None

    def close(self) -> None:
        self._closing = True
        try:
            self._listener.close()
        except OSError:
            pass
        with self._lock:
            conn, self._client = self._client, None
        if conn is not None:
            conn.close()
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=1.0)


class SimulatorService:
    """Runs the simulated instrument on its own thread.

    All touches of the harness happen on that thread; other threads interact
    through submit()/call(), which hands a closure to the loop and waits for
    the result. realtime=True paces the loop at roughly one tick per
    millisecond of wall time; otherwise the simulation runs as fast as the
    host allows.
    """

    def __init__(
        self,
        harness: SimulatorHarness,
        server: VirtualSerialServer | None = None,
        *,
        pace_ms: float = 0.0,
        realtime: bool = False,
    ):
        self.harness = harness
        self.server = server
        self.pace_ms = pace_ms
        self.realtime = realtime
        self._tasks: deque[tuple] = deque()
        self._wake = threading.Event()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        # Free-running mode advances ticks in batches: the OS sleep below has
        # ~0.1 ms granularity, so one tick per wakeup would cap simulated
        # time at roughly wall speed.
        self._batch = 1 if realtime else 20

    def start(self) -> None:
        if self.server is not None:
            self.server.start()
        self._thread = threading.Thread(
            target=self._loop, name="sim-loop", daemon=True
        )
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        self._wake.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
        if self.server is not None:
            self.server.close()

    def submit(self, fn) -> Future:
        fut: Future = Future()
        self._tasks.append((fn, fut))
        self._wake.set()
        return fut

    def call(self, fn):
        return self.submit(fn).result(timeout=5.0)

    # Convenience wrappers used by the control endpoint and tests.

    def press_button(self, i: int) -> None:
        self.call(lambda: self.harness.press_button(i))

    def release_button(self, i: int) -> None:
        self.call(lambda: self.harness.release_button(i))

    def snapshot(self) -> dict:
        def grab():
            snap = self.harness.device.snapshot()
            return {
                "t_ms": snap.clock_ms,
                "selected": self.harness.state.selected,
                "buttons_down": sorted(snap.buttons_down),
                "conducting_lines": sorted(snap.conducting_lines),
                "conducting_ports": sorted(snap.conducting_ports),
                "leds": [list(px) for px in snap.led_frame],
            }

        return self.call(grab)

    def _loop(self) -> None:
        while not self._stop.is_set():
            busy = False
            while self._tasks:
                fn, fut = self._tasks.popleft()
                busy = True
                if not fut.set_running_or_notify_cancel():
                    continue
                try:
                    fut.set_result(fn())
                except BaseException as exc:
                    fut.set_exception(exc)
            if self.server is not None:
                data = self.server.recv_pending()
                if data:
                    busy = True
                    self.harness.feed(data, self.pace_ms)
            self.harness.advance(self._batch)
            out = self.harness.output()
            if out and self.server is not None:
                self.server.send(out)
            if self.realtime:
                self._wake.wait(self.harness.tick_ms / 1000.0)
                self._wake.clear()
            elif not busy:
                # Free-running but idle: yield so waiting threads get CPU.
                time.sleep(0.0001)


class ControlServer:
    """Line-oriented admin socket: `press N`, `release N`, `state`."""

    def __init__(self, service: SimulatorService, host: str = "127.0.0.1", port: int = 0):
        self.service = service
        self._listener = _bind_listener((host, port))
        self.address = self._listener.getsockname()[:2]
        self._closing = False
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        self._thread = threading.Thread(
            target=self._accept_loop, name="control-accept", daemon=True
        )
        self._thread.start()

    def _accept_loop(self) -> None:
        while not self._closing:
            try:
                conn, _ = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            threading.Thread(
                target=self._serve, args=(conn,), name="control-client", daemon=True
            ).start()

    def _serve(self, conn: socket.socket) -> None:
        try:
            with conn, conn.makefile("rwb") as stream:
                for raw in stream:
                    reply = self._dispatch(raw.decode("ascii", "replace").strip())
                    stream.write(reply.encode("ascii") + b"\n")
                    stream.flush()
        except OSError:
            pass

    def _dispatch(self, line: str) -> str:
        parts = line.split()
        try:
            if len(parts) == 2 and parts[0] in ("press", "release"):
                index = int(parts[1])
                if parts[0] == "press":
                    self.service.press_button(index)
                else:
                    self.service.release_button(index)
                return "ok"
            if parts == ["state"]:
                return json.dumps(self.service.snapshot(), sort_keys=True)
        except Exception as exc:
            return "err %s" % exc
        return "err unknown command %r" % line

    def close(self) -> None:
        self._closing = True
        try:
            self._listener.close()
        except OSError:
            pass
        if self._thread is not None:
            self._thread.join(timeout=1.0)
