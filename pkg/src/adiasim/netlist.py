"""Circuit data model and a small line-oriented netlist format.

Format (one statement per line, ``*`` starts a comment, keywords are
case-insensitive)::

    .NAME  <ident>
    .DEFAULT R=<val>
    .NODE  <ident> [C=<val>] [ROLE=IN|OUT|VDD|GND|PCLK]
    M<ident> <drain> <gate> <source> [<bulk>] <N|P> [R=<val>]
    .INPUTS  <ident>...
    .OUTPUTS <ident>...

Values accept the engineering suffixes f p n u m k meg (also g, t).
The bulk terminal is accepted and discarded.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field, replace

DEFAULT_ON_RESISTANCE = 10e3


class DeviceKind(enum.Enum):
    NMOS = "N"
    PMOS = "P"


class NodeRole(enum.Enum):
    INTERNAL = "INTERNAL"
    INPUT = "IN"
    OUTPUT = "OUT"
    SUPPLY = "VDD"
    GROUND = "GND"
    POWER_CLOCK = "PCLK"


SOURCE_ROLES = frozenset({NodeRole.INPUT, NodeRole.SUPPLY, NodeRole.GROUND, NodeRole.POWER_CLOCK})


@dataclass(frozen=True)
class Node:
    name: str
    capacitance: float = 0.0
    role: NodeRole = NodeRole.INTERNAL


@dataclass(frozen=True)
class Device:
    """A MOS switch. Terminals are indices into ``Netlist.nodes``."""

    name: str
    kind: DeviceKind
    gate: int
    source: int
    drain: int
    on_resistance: float = DEFAULT_ON_RESISTANCE


@dataclass(frozen=True)
class Netlist:
    name: str
    nodes: tuple[Node, ...]
    devices: tuple[Device, ...]
    inputs: tuple[int, ...] = ()
    outputs: tuple[int, ...] = ()
    default_resistance: float = DEFAULT_ON_RESISTANCE
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {n.name.lower(): i for i, n in enumerate(self.nodes)})

    def node_id(self, name: str) -> int:
        try:
            return self._index[name.lower()]
        except KeyError:
            raise KeyError(f"no node named {name!r} in {self.name}") from None

    def node_name(self, idx: int) -> str:
        return self.nodes[idx].name

    def nodes_with_role(self, *roles: NodeRole) -> list[int]:
        return [i for i, n in enumerate(self.nodes) if n.role in roles]

    @property
    def input_names(self) -> list[str]:
        return [self.nodes[i].name for i in self.inputs]

    @property
    def output_names(self) -> list[str]:
        return [self.nodes[i].name for i in self.outputs]

    @property
    def is_power_clocked(self) -> bool:
        return any(n.role is NodeRole.POWER_CLOCK for n in self.nodes)

    def with_output_load(self, capacitance: float) -> "Netlist":
        """Copy of the netlist with every output node's capacitance replaced."""
        nodes = tuple(
            replace(n, capacitance=capacitance) if n.role is NodeRole.OUTPUT else n
            for n in self.nodes
        )
        return replace(self, nodes=nodes)


# --------------------------------------------------------------------------
# errors

class NetlistError(Exception):
    """Base class for parse errors; always carries a 1-based line/column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, col {column}: {message}")


class NetlistSyntaxError(NetlistError):
    pass


class DuplicateName(NetlistError):
    pass


class UnknownNode(NetlistError):
    pass


class MissingRail(NetlistError):
    pass


class InvalidValue(NetlistError):
    pass


# --------------------------------------------------------------------------
# values

_SUFFIXES = {
    "t": 1e12, "g": 1e9, "meg": 1e6, "k": 1e3, "m": 1e-3,
    "u": 1e-6, "n": 1e-9, "p": 1e-12, "f": 1e-15,
}
_VALUE_RE = re.compile(
    r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:e[+-]?\d+)?)(meg|[tgkmunpf])?$", re.IGNORECASE
)
_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.$\[\]<>:-]*$")


def parse_value(text: str) -> float:
    """``"10k"`` -> 10000.0, ``"20f"`` -> 2e-14. Raises ValueError."""
    m = _VALUE_RE.match(text.strip())
    if not m:
        raise ValueError(f"malformed value {text!r}")
    value = float(m.group(1))
    if m.group(2):
        value *= _SUFFIXES[m.group(2).lower()]
    return value


def format_value(value: float) -> str:
    return repr(float(value))


_ROLE_KEYWORDS = {r.value: r for r in NodeRole if r is not NodeRole.INTERNAL}


# --------------------------------------------------------------------------
# parser

@dataclass
class _Tok:
    text: str
    col: int


def _tokenize(line: str) -> list[_Tok]:
    return [_Tok(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _keyval(tok: _Tok, lineno: int) -> tuple[str, str]:
    key, sep, val = tok.text.partition("=")
    if not sep or not key or not val:
        raise NetlistSyntaxError(f"expected KEY=VALUE, got {tok.text!r}", lineno, tok.col)
    return key.upper(), val


def _ident(tok: _Tok, lineno: int) -> str:
    if not _IDENT_RE.match(tok.text):
        raise NetlistSyntaxError(f"invalid identifier {tok.text!r}", lineno, tok.col)
    return tok.text


def _number(tok: _Tok, raw: str, lineno: int) -> float:
    try:
        value = parse_value(raw)
    except ValueError:
        raise InvalidValue(f"malformed value {raw!r}", lineno, tok.col) from None
    if not math.isfinite(value):
        raise InvalidValue(f"non-finite value {raw!r}", lineno, tok.col)
    return value


def parse_netlist(text: str) -> Netlist:
    """Parse netlist text. Every failure is a :class:`NetlistError` with a location."""
    name = "circuit"
    default_r = DEFAULT_ON_RESISTANCE
    nodes: list[Node] = []
    node_lines: dict[str, int] = {}
    raw_devices: list[tuple[int, _Tok, list[_Tok], DeviceKind, float | None]] = []
    device_names: dict[str, int] = {}
    input_decl: list[tuple[int, _Tok]] = []
    output_decl: list[tuple[int, _Tok]] = []

    for lineno, line in enumerate(text.splitlines(), start=1):
        star = line.find("*")
        if star >= 0:
            line = line[:star]
        toks = _tokenize(line)
        if not toks:
            continue
        head = toks[0]
        kw = head.text.upper()
        if kw == ".NAME":
            if len(toks) != 2:
                raise NetlistSyntaxError(".NAME takes exactly one identifier", lineno, head.col)
            name = _ident(toks[1], lineno)
        elif kw == ".DEFAULT":
            if len(toks) != 2:
                raise NetlistSyntaxError(".DEFAULT takes R=<val>", lineno, head.col)
            key, val = _keyval(toks[1], lineno)
            if key != "R":
                raise NetlistSyntaxError(f"unknown .DEFAULT key {key}", lineno, toks[1].col)
            default_r = _number(toks[1], val, lineno)
            if default_r <= 0:
                raise InvalidValue("default on-resistance must be positive", lineno, toks[1].col)
        elif kw == ".NODE":
            if len(toks) < 2:
                raise NetlistSyntaxError(".NODE needs a name", lineno, head.col)
            nname = _ident(toks[1], lineno)
            if nname.lower() in node_lines:
                raise DuplicateName(
                    f"node {nname!r} already declared on line {node_lines[nname.lower()]}",
                    lineno, toks[1].col)
            cap, role = 0.0, NodeRole.INTERNAL
            for tok in toks[2:]:
                key, val = _keyval(tok, lineno)
                if key == "C":
                    cap = _number(tok, val, lineno)
                    if cap < 0:
                        raise InvalidValue("capacitance must be non-negative", lineno, tok.col)
                elif key == "ROLE":
                    try:
                        role = _ROLE_KEYWORDS[val.upper()]
                    except KeyError:
                        raise NetlistSyntaxError(f"unknown role {val!r}", lineno, tok.col) from None
                else:
                    raise NetlistSyntaxError(f"unknown .NODE key {key}", lineno, tok.col)
            node_lines[nname.lower()] = lineno
            nodes.append(Node(nname, cap, role))
        elif kw in (".INPUTS", ".OUTPUTS"):
            target = input_decl if kw == ".INPUTS" else output_decl
            for tok in toks[1:]:
                _ident(tok, lineno)
                target.append((lineno, tok))
        elif kw.startswith("."):
            raise NetlistSyntaxError(f"unknown directive {head.text}", lineno, head.col)
        elif kw.startswith("M"):
            dname = _ident(head, lineno)
            if dname.lower() in device_names:
                raise DuplicateName(
                    f"device {dname!r} already declared on line {device_names[dname.lower()]}",
                    lineno, head.col)
            rest = toks[1:]
            r_value = None
            if rest and "=" in rest[-1].text:
                key, val = _keyval(rest[-1], lineno)
                if key != "R":
                    raise NetlistSyntaxError(f"unknown device key {key}", lineno, rest[-1].col)
                r_value = _number(rest[-1], val, lineno)
                if r_value <= 0:
                    raise InvalidValue("on-resistance must be positive", lineno, rest[-1].col)
                rest = rest[:-1]
            if len(rest) not in (4, 5):
                raise NetlistSyntaxError(
                    "expected M<name> <drain> <gate> <source> [<bulk>] <N|P> [R=<val>]",
                    lineno, head.col)
            kind_tok = rest[-1]
            try:
                kind = DeviceKind(kind_tok.text.upper())
            except ValueError:
                raise NetlistSyntaxError(
                    f"device type must be N or P, got {kind_tok.text!r}", lineno, kind_tok.col
                ) from None
            terms = rest[:3]
            for tok in rest[:-1]:
                _ident(tok, lineno)
            device_names[dname.lower()] = lineno
            raw_devices.append((lineno, head, terms, kind, r_value))
        else:
            raise NetlistSyntaxError(f"unrecognised statement {head.text!r}", lineno, head.col)

    index = {n.name.lower(): i for i, n in enumerate(nodes)}

    def lookup(tok: _Tok, lineno: int) -> int:
        try:
            return index[tok.text.lower()]
        except KeyError:
            raise UnknownNode(f"undeclared node {tok.text!r}", lineno, tok.col) from None

    devices = []
    for lineno, head, (d_tok, g_tok, s_tok), kind, r_value in raw_devices:
        drain, gate, source = (lookup(t, lineno) for t in (d_tok, g_tok, s_tok))
        if drain == source:
            raise InvalidValue("source and drain are the same node", lineno, s_tok.col)
        devices.append(Device(head.text, kind, gate, source, drain,
                              default_r if r_value is None else r_value))

    def pin_list(decl, role: NodeRole) -> list[int]:
        order: list[int] = []
        for lineno, tok in decl:
            idx = lookup(tok, lineno)
            node = nodes[idx]
            if node.role not in (NodeRole.INTERNAL, role):
                raise InvalidValue(
                    f"node {node.name!r} has role {node.role.value}, cannot be listed as {role.value}",
                    lineno, tok.col)
            if idx in order:
                raise DuplicateName(f"pin {node.name!r} listed twice", lineno, tok.col)
            nodes[idx] = replace(node, role=role)
            order.append(idx)
        order.extend(i for i, n in enumerate(nodes) if n.role is role and i not in order)
        return order

    inputs = pin_list(input_decl, NodeRole.INPUT)
    outputs = pin_list(output_decl, NodeRole.OUTPUT)

    last_line = max(len(text.splitlines()), 1)
    n_gnd = sum(n.role is NodeRole.GROUND for n in nodes)
    if n_gnd != 1:
        raise MissingRail(f"expected exactly one GND rail, found {n_gnd}", last_line, 1)
    if not any(n.role in (NodeRole.SUPPLY, NodeRole.POWER_CLOCK) for n in nodes):
        raise MissingRail("no VDD or PCLK rail declared", last_line, 1)
    return Netlist(name, tuple(nodes), tuple(devices), tuple(inputs), tuple(outputs), default_r)


def serialize_netlist(n: Netlist, comment: str = "") -> str:
    """Canonical text form; ``comment`` lines are written as ``*`` comments after the title."""
    lines = [f"* {n.name}"] + [f"* {c}" if c else "*" for c in comment.splitlines()]
    lines += [f".NAME {n.name}", f".DEFAULT R={format_value(n.default_resistance)}"]
    for node in n.nodes:
        parts = [".NODE", node.name]
        if node.capacitance:
            parts.append(f"C={format_value(node.capacitance)}")
        if node.role is not NodeRole.INTERNAL:
            parts.append(f"ROLE={node.role.value}")
        lines.append(" ".join(parts))
    for d in n.devices:
        lines.append(
            f"{d.name} {n.nodes[d.drain].name} {n.nodes[d.gate].name} {n.nodes[d.source].name} "
            f"{d.kind.value} R={format_value(d.on_resistance)}"
        )
    if n.inputs:
        lines.append(".INPUTS " + " ".join(n.nodes[i].name for i in n.inputs))
    if n.outputs:
        lines.append(".OUTPUTS " + " ".join(n.nodes[i].name for i in n.outputs))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Diagnostic:
    code: str
    element: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.element}: {self.message}"


def validate(n: Netlist) -> list[Diagnostic]:
    """Check every structural invariant; an empty list means the netlist is sound."""
    diags: list[Diagnostic] = []
    seen: dict[str, str] = {}
    for node in n.nodes:
        key = node.name.lower()
        if key in seen:
            diags.append(Diagnostic("DuplicateName", node.name, f"clashes with node {seen[key]!r}"))
        seen[key] = node.name
        if not (node.capacitance >= 0 and math.isfinite(node.capacitance)):
            diags.append(Diagnostic("InvalidValue", node.name, "capacitance must be finite and >= 0"))
    dev_seen: set[str] = set()
    n_nodes = len(n.nodes)
    for d in n.devices:
        if d.name.lower() in dev_seen:
            diags.append(Diagnostic("DuplicateName", d.name, "device name reused"))
        dev_seen.add(d.name.lower())
        if not all(0 <= t < n_nodes for t in (d.gate, d.source, d.drain)):
            diags.append(Diagnostic("UnknownNode", d.name, "terminal index out of range"))
            continue
        if d.source == d.drain:
            diags.append(Diagnostic("SelfShorted", d.name, "source and drain are the same node"))
        if not (d.on_resistance > 0 and math.isfinite(d.on_resistance)):
            diags.append(Diagnostic("InvalidValue", d.name, "on-resistance must be finite and > 0"))

    n_gnd = sum(node.role is NodeRole.GROUND for node in n.nodes)
    if n_gnd != 1:
        diags.append(Diagnostic("MissingRail", n.name, f"expected exactly one GND rail, found {n_gnd}"))
    if not any(node.role in (NodeRole.SUPPLY, NodeRole.POWER_CLOCK) for node in n.nodes):
        diags.append(Diagnostic("MissingRail", n.name, "no VDD or PCLK rail"))
    if not n.devices:
        diags.append(Diagnostic("NoDevices", n.name, "netlist has no devices"))

    terminals = {t for d in n.devices for t in (d.source, d.drain)}
    for i, node in enumerate(n.nodes):
        if node.role is NodeRole.INTERNAL and i not in terminals:
            diags.append(Diagnostic("FloatingNode", node.name, "internal node is not a channel terminal"))
        if node.role is NodeRole.OUTPUT and not node.capacitance > 0:
            diags.append(Diagnostic("ZeroLoadCapacitance", node.name, "output node needs C > 0"))
    for idx in n.inputs:
        if n.nodes[idx].role is not NodeRole.INPUT:
            diags.append(Diagnostic("PinRole", n.nodes[idx].name, "listed as input but role differs"))
    for idx in n.outputs:
        if n.nodes[idx].role is not NodeRole.OUTPUT:
            diags.append(Diagnostic("PinRole", n.nodes[idx].name, "listed as output but role differs"))
    return diags


class NetlistBuilder:
    """Programmatic construction helper used by the built-in circuits."""

    def __init__(self, name: str, default_resistance: float = DEFAULT_ON_RESISTANCE):
        self.name = name
        self.default_resistance = default_resistance
        self._nodes: list[Node] = []
        self._index: dict[str, int] = {}
        self._devices: list[Device] = []
        self._inputs: list[int] = []
        self._outputs: list[int] = []

    def node(self, name: str, capacitance: float = 0.0, role: NodeRole = NodeRole.INTERNAL) -> int:
        key = name.lower()
        if key in self._index:
            idx = self._index[key]
            old = self._nodes[idx]
            if role is not NodeRole.INTERNAL or capacitance:
                self._nodes[idx] = Node(old.name, capacitance or old.capacitance,
                                        role if role is not NodeRole.INTERNAL else old.role)
            return idx
        self._index[key] = len(self._nodes)
        self._nodes.append(Node(name, capacitance, role))
        if role is NodeRole.INPUT:
            self._inputs.append(self._index[key])
        elif role is NodeRole.OUTPUT:
            self._outputs.append(self._index[key])
        return self._index[key]

    @property
    def device_count(self) -> int:
        return len(self._devices)

    def mos(self, kind: DeviceKind, drain: str, gate: str, source: str, r: float | None = None):
        d = Device(f"M{len(self._devices) + 1}", kind, self.node(gate), self.node(source),
                   self.node(drain), self.default_resistance if r is None else r)
        self._devices.append(d)

    def nmos(self, drain: str, gate: str, source: str, r: float | None = None):
        self.mos(DeviceKind.NMOS, drain, gate, source, r)

    def pmos(self, drain: str, gate: str, source: str, r: float | None = None):
        self.mos(DeviceKind.PMOS, drain, gate, source, r)

    def inverter(self, out: str, inp: str, vdd: str = "vdd", gnd: str = "gnd"):
        self.pmos(out, inp, vdd)
        self.nmos(out, inp, gnd)

    def tgate(self, a: str, b: str, ctrl: str, ctrl_b: str):
        """Transmission gate between ``a`` and ``b``, conducting when ``ctrl`` is high."""
        self.nmos(b, ctrl, a)
        self.pmos(b, ctrl_b, a)

    def build(self) -> Netlist:
        return Netlist(self.name, tuple(self._nodes), tuple(self._devices),
                       tuple(self._inputs), tuple(self._outputs), self.default_resistance)
