"""Command line entry points: switchsim (virtual instrument) and switchctl
(host driver).

Exit codes follow the usual convention: 0 success, 2 usage or validation
problem, 3 runtime failure (connect, timeout, bind).
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import sys
import threading

from .api import serve_api
from .errors import (
    ConfigInvalid,
    ParseError,
    PortOutOfRange,
    SwitchError,
    ValidationError,
)
from .host import connect, parse_endpoint
from .ladder import LadderConfig, format_threshold_table
from .simulator import SimulatorHarness, TraceRecorder
from .topology import Topology, get_preset, load_topology
from .transport import ControlServer, SimulatorService, VirtualSerialServer

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def _parse_addr(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ParseError("address %r: expected HOST:PORT" % text)
    return (host or "127.0.0.1", int(port))


def _resolve_topology(spec: str) -> Topology:
    if os.path.exists(spec) or spec.endswith(".json"):
        with open(spec) as f:
            return load_topology(f.read())
    try:
        return get_preset(spec)
    except KeyError:
        raise ParseError(
            "%r is neither a readable file nor a preset name" % spec
        ) from None


def switchsim_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="switchsim",
        description="Virtual switch controller served over a TCP serial bridge.",
    )
    parser.add_argument(
        "--topology", required=True, metavar="FILE|PRESET",
        help="topology JSON file or a built-in preset name",
    )
    parser.add_argument(
        "--listen", required=True, metavar="HOST:PORT",
        help="serial bridge address (port 0 picks a free port)",
    )
    parser.add_argument(
        "--pace-baud", type=int, default=0, metavar="BAUD",
        help="pace inbound bytes at this wire rate in simulated time (0 = instant)",
    )
    parser.add_argument(
        "--noise", type=int, default=0, metavar="COUNTS",
        help="uniform ADC noise amplitude in counts",
    )
    parser.add_argument("--seed", type=int, default=0, help="noise RNG seed")
    parser.add_argument(
        "--trace", metavar="PATH", help="write the event trace to this file"
    )
    parser.add_argument(
        "--control", metavar="HOST:PORT",
        help="admin socket for pressing virtual panel buttons (press/release/state)",
    )
    parser.add_argument(
        "--extensions", action="store_true",
        help="firmware build with the '?' query and change notifications",
    )
    parser.add_argument(
        "--max-speed", action="store_true",
        help="free-run the simulation instead of pacing it to wall time",
    )
    args = parser.parse_args(argv)

    try:
        topology = _resolve_topology(args.topology)
        listen_addr = _parse_addr(args.listen)
        control_addr = _parse_addr(args.control) if args.control else None
    except (ParseError, ValidationError, ConfigInvalid, OSError) as exc:
        print("switchsim: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    if args.pace_baud < 0 or args.noise < 0:
        print("switchsim: --pace-baud and --noise must be >= 0", file=sys.stderr)
        return EXIT_USAGE

    stop = threading.Event()
    for signum in (signal.SIGINT, signal.SIGTERM):
        signal.signal(signum, lambda *_: stop.set())

    trace_file = open(args.trace, "w", buffering=1) if args.trace else None
    recorder = TraceRecorder(sink=trace_file) if trace_file else None
    harness = SimulatorHarness(
        topology,
        extensions=args.extensions,
        adc_noise_counts=args.noise,
        seed=args.seed,
        trace=recorder,
    )
    pace_ms = 10_000.0 / args.pace_baud if args.pace_baud else 0.0

    try:
        server = VirtualSerialServer(*listen_addr)
    except SwitchError as exc:
        print("switchsim: %s" % exc, file=sys.stderr)
        return EXIT_RUNTIME
    service = SimulatorService(
        harness, server, pace_ms=pace_ms, realtime=not args.max_speed
    )
    control = None
    if control_addr is not None:
        try:
            control = ControlServer(service, *control_addr)
        except SwitchError as exc:
            server.close()
            print("switchsim: %s" % exc, file=sys.stderr)
            return EXIT_RUNTIME

    service.start()
    if control is not None:
        control.start()
    print("topology %s: %d ports, %s drive" % (
        topology.name, topology.n_ports, topology.drive_mode
    ))
    print("serial listening on %s:%d" % server.address)
    if control is not None:
        print("control listening on %s:%d" % control.address)
    sys.stdout.flush()

    try:
        stop.wait()
    except KeyboardInterrupt:
        pass
    if control is not None:
        control.close()
    service.stop()
    if trace_file is not None:
        trace_file.close()
    return EXIT_OK


def _session_from_args(args):
    if not args.endpoint:
        raise ParseError(
            "no endpoint: pass --endpoint or set SWITCHCTL_ENDPOINT"
        )
    mode = "off" if args.legacy else args.extensions
    return connect(parse_endpoint(args.endpoint), extensions=mode)


def _format_state(state) -> str:
    shown = 0 if state.selected is None else state.selected
    return "selected=%d source=%s" % (shown, state.source)


def switchctl_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="switchctl", description="Switch controller host driver."
    )
    parser.add_argument(
        "--endpoint", default=os.environ.get("SWITCHCTL_ENDPOINT"),
        metavar="EP", help="serial:<dev>[:baud] or tcp:<host>:<port> "
        "(default: $SWITCHCTL_ENDPOINT)",
    )
    parser.add_argument(
        "--extensions", choices=("auto", "on", "off"), default="auto",
        help="protocol extensions: probe (auto), require (on), or never (off)",
    )
    parser.add_argument(
        "--legacy", action="store_true", help="shorthand for --extensions off"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_select = sub.add_parser("select", help="route the given port")
    p_select.add_argument("port", type=int)

    p_status = sub.add_parser("status", help="report the selected port")
    p_status.add_argument("--json", action="store_true")

    sub.add_parser("watch", help="stream front-panel change notifications")

    p_thr = sub.add_parser(
        "thresholds", help="print the button ladder decode table"
    )
    p_thr.add_argument("--vcc", type=float, default=5.0, metavar="VOLTS")
    p_thr.add_argument("--buttons", type=int, default=9, metavar="N")

    p_serve = sub.add_parser("serve", help="expose the device over HTTP and WebSocket")
    p_serve.add_argument("--http", required=True, metavar="HOST:PORT")

    args = parser.parse_args(argv)

    try:
        if args.command == "thresholds":
            cfg = LadderConfig(
                vcc_volts=args.vcc, vref_volts=5.0, n_buttons=args.buttons
            )
            sys.stdout.write(format_threshold_table(cfg))
            return EXIT_OK

        if args.command == "select":
            if not 1 <= args.port <= 9:
                print("switchctl: port must be in 1..9", file=sys.stderr)
                return EXIT_USAGE
            session = _session_from_args(args)
            try:
                state = session.select_port(args.port)
                print(_format_state(state))
            finally:
                session.close()
            return EXIT_OK

        if args.command == "status":
            session = _session_from_args(args)
            try:
                state = (
                    session.query_state()
                    if session.mode == "extended"
                    else session.get_state()
                )
            finally:
                session.close()
            if args.json:
                print(json.dumps(state.as_dict(), sort_keys=True))
            else:
                print(_format_state(state))
            return EXIT_OK

        if args.command == "watch":
            session = _session_from_args(args)
            print(_format_state(session.get_state()), flush=True)
            try:
                while True:
                    for _, port in session.poll_events(timeout_s=0.2):
                        shown = 0 if port is None else port
                        print("external selected=%d" % shown, flush=True)
            except KeyboardInterrupt:
                return EXIT_OK
            finally:
                session.close()

        if args.command == "serve":
            host, port = _parse_addr(args.http)
            session = _session_from_args(args)
            try:
                serve_api(session, host, port)
            except KeyboardInterrupt:
                return EXIT_OK
            finally:
                session.close()
            return EXIT_OK
    except (ParseError, PortOutOfRange, ConfigInvalid, ValidationError) as exc:
        print("switchctl: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except (SwitchError, ValueError) as exc:
        print("switchctl: %s" % exc, file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK
