"""Switch network descriptions: ports, control lines, DSUB pins, panel layout.

A topology is immutable once loaded and freely shareable. The file format
is a single JSON object with keys exactly
    name, n_ports, drive_mode, port_lines, port_pixel, button_port, line_pin
where integer-keyed maps are encoded as string-keyed objects, e.g.
    {"name": "sp3t-cots", "n_ports": 3, "drive_mode": "direct",
     "port_lines": {"1": [1], "2": [2], "3": [3]},
     "port_pixel": {"1": 0, "2": 1, "3": 2},
     "button_port": {"1": 1, "2": 2, "3": 3},
     "line_pin": {"1": 1, "2": 2, "3": 3}}

The built-in presets use an identity line-to-DSUB-pin map, and the dual-pole
preset pairs throw k with lines {k, k+9}; both are documented wiring
assumptions, trivially editable in a topology file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ParseError, PortOutOfRange, ValidationError

MAX_LINES = 24
MAX_PIN = 25

DOCUMENT_KEYS = (
    "name",
    "n_ports",
    "drive_mode",
    "port_lines",
    "port_pixel",
    "button_port",
    "line_pin",
)


@dataclass(frozen=True)
class Topology:
    """Declarative description of one switch network."""

    name: str
    n_ports: int
    drive_mode: str  # "relay" | "direct"
    port_lines: dict[int, frozenset[int]]
    port_pixel: dict[int, int]
    button_port: dict[int, int]
    line_pin: dict[int, int]

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """Check every structural invariant; raises ValidationError."""
        if self.n_ports < 1:
            raise ValidationError("n_ports must be >= 1")
        if self.drive_mode not in ("relay", "direct"):
            raise ValidationError("drive_mode must be 'relay' or 'direct'")

        ports = set(range(1, self.n_ports + 1))
        if set(self.port_lines) != ports:
            raise ValidationError("port_lines must cover ports 1..n_ports")
        seen: set[int] = set()
        for port, lines in self.port_lines.items():
            if not lines:
                raise ValidationError("port %d has no control line" % port)
            for line in lines:
                if not 1 <= line <= MAX_LINES:
                    raise ValidationError(
                        "line %d out of range 1..%d" % (line, MAX_LINES)
                    )
                if line in seen:
                    raise ValidationError("shared control line %d" % line)
                seen.add(line)

        if set(self.port_pixel) != ports or sorted(
            self.port_pixel.values()
        ) != list(range(self.n_ports)):
            raise ValidationError("port_pixel must be a bijection onto 0..n_ports-1")

        if sorted(self.button_port.values()) != sorted(ports):
            raise ValidationError("button_port must be a bijection onto ports")

        if set(self.line_pin) != seen:
            raise ValidationError("line_pin must cover exactly the lines in use")
        pins = list(self.line_pin.values())
        if len(set(pins)) != len(pins):
            raise ValidationError("line_pin must be injective")
        for pin in pins:
            if not 1 <= pin <= MAX_PIN:
                raise ValidationError("DSUB pin %d out of range 1..%d" % (pin, MAX_PIN))

    @property
    def lines(self) -> frozenset[int]:
        """All control lines in use, across every port."""
        return frozenset(l for lines in self.port_lines.values() for l in lines)


def lines_for_port(t: Topology, port: int) -> frozenset[int]:
    """Control lines that must be energized to route the given port."""
    if not 1 <= port <= t.n_ports:
        raise PortOutOfRange("port %d not in 1..%d" % (port, t.n_ports))
    return t.port_lines[port]


def _int_keyed(obj, key: str) -> dict[int, object]:
    if not isinstance(obj, dict):
        raise ParseError("%s must be an object" % key)
    out = {}
    for k, v in obj.items():
        try:
            out[int(k)] = v
        except (TypeError, ValueError):
            raise ParseError("%s key %r is not an integer" % (key, k)) from None
    return out


def load_topology(document: str) -> Topology:
    """Parse and validate a topology JSON document."""
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as e:
        raise ParseError("not valid JSON: %s" % e) from None
    if not isinstance(raw, dict):
        raise ParseError("document must be a JSON object")
    if set(raw) != set(DOCUMENT_KEYS):
        missing = set(DOCUMENT_KEYS) - set(raw)
        extra = set(raw) - set(DOCUMENT_KEYS)
        raise ParseError(
            "bad keys: missing %s, unexpected %s" % (sorted(missing), sorted(extra))
        )
    if not isinstance(raw["name"], str):
        raise ParseError("name must be a string")
    if not isinstance(raw["n_ports"], int) or isinstance(raw["n_ports"], bool):
        raise ParseError("n_ports must be an integer")

    port_lines = {}
    for port, lines in _int_keyed(raw["port_lines"], "port_lines").items():
        if not isinstance(lines, list) or not all(
            isinstance(l, int) and not isinstance(l, bool) for l in lines
        ):
            raise ParseError("port_lines[%d] must be a list of integers" % port)
        port_lines[port] = frozenset(lines)

    def int_map(key: str) -> dict[int, int]:
        out = {}
        for k, v in _int_keyed(raw[key], key).items():
            if not isinstance(v, int) or isinstance(v, bool):
                raise ParseError("%s[%d] must be an integer" % (key, k))
            out[k] = v
        return out

    t = Topology(
        name=raw["name"],
        n_ports=raw["n_ports"],
        drive_mode=raw["drive_mode"] if isinstance(raw["drive_mode"], str) else "",
        port_lines=port_lines,
        port_pixel=int_map("port_pixel"),
        button_port=int_map("button_port"),
        line_pin=int_map("line_pin"),
    )
    t.validate()
    return t


def serialize(t: Topology) -> str:
    """Render a topology back to its canonical JSON document."""
    doc = {
        "name": t.name,
        "n_ports": t.n_ports,
        "drive_mode": t.drive_mode,
        "port_lines": {str(p): sorted(lines) for p, lines in t.port_lines.items()},
        "port_pixel": {str(p): px for p, px in t.port_pixel.items()},
        "button_port": {str(b): p for b, p in t.button_port.items()},
        "line_pin": {str(l): pin for l, pin in t.line_pin.items()},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _chain(name: str, n_ports: int, drive_mode: str, lines_of=None) -> Topology:
    lines_of = lines_of or (lambda p: [p])
    port_lines = {p: frozenset(lines_of(p)) for p in range(1, n_ports + 1)}
    all_lines = sorted(l for ls in port_lines.values() for l in ls)
    t = Topology(
        name=name,
        n_ports=n_ports,
        drive_mode=drive_mode,
        port_lines=port_lines,
        port_pixel={p: p - 1 for p in range(1, n_ports + 1)},
        button_port={b: b for b in range(1, n_ports + 1)},
        line_pin={l: l for l in all_lines},
    )
    t.validate()
    return t


def builtin_presets() -> list[Topology]:
    """The shipped switch-network presets."""
    return [
        _chain("sp6t-cots", 6, "direct"),
        _chain("sp9t-custom", 9, "relay"),
        _chain("sp8t-custom", 8, "relay"),
        _chain("dual-sp9t", 9, "relay", lambda p: [p, p + 9]),
        _chain("sp3t-cots", 3, "direct"),
    ]


def get_preset(name: str) -> Topology:
    for t in builtin_presets():
        if t.name == name:
            return t
    raise KeyError("no preset named %r" % name)
