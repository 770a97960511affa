"""TCP serial bridge and the background simulation service."""

import json
import socket
import time

import pytest

from memswitch.errors import BindFailed
from memswitch.simulator import SimulatorHarness
from memswitch.topology import get_preset
from memswitch.transport import ControlServer, SimulatorService, VirtualSerialServer

SP9 = get_preset("sp9t-custom")


@pytest.fixture
def service():
    harness = SimulatorHarness(SP9, extensions=True)
    server = VirtualSerialServer("127.0.0.1", 0)
    svc = SimulatorService(harness, server)
    svc.start()
    yield svc
    svc.stop()


def wait_until(predicate, timeout_s=5.0, interval_s=0.005):
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        if predicate():
            return True
        time.sleep(interval_s)
    return predicate()


class TestVirtualSerialServer:
    def test_byte_written_by_client_selects_channel(self, service):
        with socket.create_connection(service.server.address) as sock:
            sock.sendall(b"2")
            assert wait_until(
                lambda: service.snapshot()["conducting_ports"] == [2]
            )
            assert service.snapshot()["selected"] == 2

    def test_device_replies_reach_the_client(self, service):
        with socket.create_connection(service.server.address) as sock:
            sock.sendall(b"4?")
            sock.settimeout(5.0)
            got = b""
            while not got.endswith(b"\n"):
                got += sock.recv(64)
            assert got == b"S4\n"

    def test_second_client_is_refused(self, service):
        with socket.create_connection(service.server.address) as first:
            first.sendall(b"1")
            assert wait_until(lambda: service.snapshot()["selected"] == 1)
            with socket.create_connection(service.server.address) as second:
                second.settimeout(5.0)
                try:
                    data = second.recv(64)
                except (ConnectionResetError, BrokenPipeError):
                    data = b""
                assert data == b""
            # The first link still works afterwards.
            first.sendall(b"3")
            assert wait_until(lambda: service.snapshot()["selected"] == 3)

    def test_port_frees_up_after_disconnect(self, service):
        with socket.create_connection(service.server.address) as first:
            first.sendall(b"1")
            assert wait_until(lambda: service.snapshot()["selected"] == 1)
        with socket.create_connection(service.server.address) as second:
            assert wait_until(lambda: service.server._client is not None)
            second.sendall(b"2")
            assert wait_until(lambda: service.snapshot()["selected"] == 2)

    def test_bind_conflict_raises(self, service):
        host, port = service.server.address
        with pytest.raises(BindFailed):
            VirtualSerialServer(host, port)


class TestSimulatorService:
    def test_submit_runs_on_sim_thread(self, service):
        clock = service.call(lambda: service.harness.device.clock_ms)
        assert clock > 0

    def test_snapshot_shape(self, service):
        snap = service.snapshot()
        assert set(snap) == {
            "t_ms",
            "selected",
            "buttons_down",
            "conducting_lines",
            "conducting_ports",
            "leds",
        }
        assert len(snap["leds"]) == 9

    def test_press_and_release_full_path(self, service):
        service.press_button(5)
        assert wait_until(lambda: service.snapshot()["selected"] == 5)
        assert wait_until(
            lambda: service.snapshot()["conducting_ports"] == [5]
        )
        service.release_button(5)
        snap = service.snapshot()
        assert snap["buttons_down"] == []
        assert snap["selected"] == 5

    def test_submit_propagates_exceptions(self, service):
        def boom():
            raise RuntimeError("nope")

        with pytest.raises(RuntimeError, match="nope"):
            service.call(boom)

    def test_simulated_time_outruns_wall_time(self, service):
        t0 = service.snapshot()["t_ms"]
        time.sleep(0.1)
        t1 = service.snapshot()["t_ms"]
        # Free-running mode: at least 10x wall speed even on a loaded box.
        assert t1 - t0 > 1000


class TestControlServer:
    @pytest.fixture
    def control(self, service):
        ctl = ControlServer(service, "127.0.0.1", 0)
        ctl.start()
        yield ctl
        ctl.close()

    def lines(self, ctl):
        sock = socket.create_connection(ctl.address)
        sock.settimeout(5.0)
        return sock, sock.makefile("rwb")

    def ask(self, stream, line: bytes) -> bytes:
        stream.write(line + b"\n")
        stream.flush()
        return stream.readline().strip()

    def test_press_release_state_cycle(self, service, control):
        sock, stream = self.lines(control)
        with sock:
            assert self.ask(stream, b"press 6") == b"ok"
            assert wait_until(lambda: service.snapshot()["selected"] == 6)
            state = json.loads(self.ask(stream, b"state"))
            assert state["selected"] == 6
            assert state["buttons_down"] == [6]
            assert self.ask(stream, b"release 6") == b"ok"
            state = json.loads(self.ask(stream, b"state"))
            assert state["buttons_down"] == []

    def test_bad_commands_report_errors(self, service, control):
        sock, stream = self.lines(control)
        with sock:
            assert self.ask(stream, b"press zero").startswith(b"err")
            assert self.ask(stream, b"press 99").startswith(b"err")
            assert self.ask(stream, b"reboot").startswith(b"err")
            # The connection survives errors.
            assert self.ask(stream, b"press 1") == b"ok"

    def test_multiple_control_clients_allowed(self, service, control):
        sock_a, stream_a = self.lines(control)
        sock_b, stream_b = self.lines(control)
        with sock_a, sock_b:
            assert self.ask(stream_a, b"press 2") == b"ok"
            assert self.ask(stream_b, b"release 2") == b"ok"
