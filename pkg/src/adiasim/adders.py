"""Built-in one-bit full adder netlists.

Seven topologies, each reconstructed from its Boolean function and the
standard published structure of its family:

=========  ========  ===========  ==========================================
kind       devices   supply       structure
=========  ========  ===========  ==========================================
cmos28     28        DC           mirror adder, carry-bar and sum-bar stages
                                  plus two output inverters
cpl        22 (24)   DC           nMOS pass XOR/XNOR, sum and carry muxes,
                                  four restoring inverters, C inverter;
                                  optional cross-coupled pMOS restorers
tgate      20        DC           transmission-gate XOR and muxes
pal        10        power clock  shared nMOS pass tree fed by the clock
pfal       38        power clock  dual-rail gates: cross-coupled inverters
                                  and nMOS function trees F, /F
tgal       60        power clock  dual-rail gates: transmission-gate decode
                                  trees and cross-coupled nMOS pull-downs
serf       10        DC           pass XOR/XNOR of A, B with one inverter
=========  ========  ===========  ==========================================

Complemented inputs of the dual-rail families are separate input pins
named ``<X>_b``; every output carries the 20 fF load.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from pathlib import Path

from .netlist import Netlist, NetlistBuilder, NodeRole, parse_netlist, serialize_netlist
from .switch_eval import EvalConfig, LogicValue, NodeState, independent_inputs, truth_table

C_LOAD = 20e-15
CIRCUITS_DIR = Path(__file__).parent / "circuits"
CIRCUITS_ENV = "ADIASIM_CIRCUITS_DIR"


class AdderKind(enum.Enum):
    CMOS28 = "cmos28"
    CPL = "cpl"
    TGATE = "tgate"
    PAL = "pal"
    PFAL = "pfal"
    TGAL = "tgal"
    SERF = "serf"


class SupplyRegime(enum.Enum):
    DC = "dc"
    POWER_CLOCK = "power-clock"


EXPECTED_DEVICES = {
    AdderKind.CMOS28: 28,
    AdderKind.CPL: 22,
    AdderKind.TGATE: 20,
    AdderKind.PAL: 10,
    AdderKind.PFAL: 38,
    AdderKind.TGAL: 60,
    AdderKind.SERF: 10,
}
CPL_OPTIONAL_PMOS = 2

DESCRIPTIONS = {
    "cmos28": "Static mirror adder: complementary carry and sum stages plus two output inverters.",
    "cpl": "Complementary pass-transistor logic. Pass XOR/XNOR of A and B, pass muxes for sum\n"
           "and carry, four output inverters, and one inverter deriving the complement of C.",
    "cpl24": "CPL with the optional pair of cross-coupled pMOS restoring the XOR/XNOR nodes.",
    "tgate": "Transmission-gate adder: three input inverters, a TG XOR with restoring inverter,\n"
             "and TG multiplexers for sum and carry.",
    "pal": "Single-rail pass network fed only by the power clock. Every gate is a primary\n"
           "input, so charge on Sum and Carry returns through the same path during recovery.",
    "pfal": "Dual-rail: Sum/Sum_b each use a 10-device A/B/C decode tree, Carry/Carry_b a\n"
            "5-device majority network, each pair latched by 2 pMOS and 2 nMOS (38 total).",
    "tgal": "Dual-rail transmission-gate trees, 30 devices per gate: a 14-position TG decode\n"
            "network (28 devices) for each pair plus 2 cross-coupled nMOS to ground.",
    "serf": "Energy-recovery full adder: one inverter for A, a 4-device XNOR, and pass\n"
            "multiplexers for sum and carry.",
}

REGIME = {
    AdderKind.CMOS28: SupplyRegime.DC,
    AdderKind.CPL: SupplyRegime.DC,
    AdderKind.TGATE: SupplyRegime.DC,
    AdderKind.SERF: SupplyRegime.DC,
    AdderKind.PAL: SupplyRegime.POWER_CLOCK,
    AdderKind.PFAL: SupplyRegime.POWER_CLOCK,
    AdderKind.TGAL: SupplyRegime.POWER_CLOCK,
}


@dataclass(frozen=True)
class AdderSpec:
    kind: AdderKind
    netlist: Netlist
    expected_devices: int
    supply_regime: SupplyRegime
    cpl_optional_pmos: bool = False

    @property
    def name(self) -> str:
        return self.kind.value if self.kind else self.netlist.name


def _dc_rails(b: NetlistBuilder):
    b.node("vdd", role=NodeRole.SUPPLY)
    b.node("gnd", role=NodeRole.GROUND)


def _clock_rails(b: NetlistBuilder):
    b.node("pclk", role=NodeRole.POWER_CLOCK)
    b.node("gnd", role=NodeRole.GROUND)


def _pins(b: NetlistBuilder, inputs, outputs):
    for name in inputs:
        b.node(name, role=NodeRole.INPUT)
    for name in outputs:
        b.node(name, C_LOAD, NodeRole.OUTPUT)


def _cmos28() -> Netlist:
    b = NetlistBuilder("cmos28")
    _dc_rails(b)
    _pins(b, "ABC", ["Sum", "Carry"])
    # carry-bar: pull-down (A+B)C + AB, mirrored pull-up
    for fet, rail, x, y in ((b.nmos, "gnd", "cn1", "cn2"), (b.pmos, "vdd", "cp1", "cp2")):
        fet(x, "A", rail)
        fet(x, "B", rail)
        fet("co_b", "C", x)
        fet(y, "A", rail)
        fet("co_b", "B", y)
    # sum-bar: pull-down (A+B+C)co_b + ABC, mirrored pull-up
    for fet, rail, x, y, z in ((b.nmos, "gnd", "sn1", "sn2", "sn3"),
                               (b.pmos, "vdd", "sp1", "sp2", "sp3")):
        fet(x, "A", rail)
        fet(x, "B", rail)
        fet(x, "C", rail)
        fet("s_b", "co_b", x)
        fet(y, "A", rail)
        fet(z, "B", y)
        fet("s_b", "C", z)
    b.inverter("Sum", "s_b")
    b.inverter("Carry", "co_b")
    return b.build()


def _cpl(optional_pmos: bool) -> Netlist:
    b = NetlistBuilder("cpl24" if optional_pmos else "cpl")
    _dc_rails(b)
    _pins(b, ["A", "B", "C", "A_b", "B_b"], ["Sum", "Carry", "Sum_b", "Carry_b"])
    b.inverter("c_n", "C")
    # x = A xor B, xn = A xnor B (outputs degraded by one threshold)
    b.nmos("x", "A", "B_b")
    b.nmos("x", "A_b", "B")
    b.nmos("xn", "A", "B")
    b.nmos("xn", "A_b", "B_b")
    # s = x xor C and its complement
    b.nmos("s", "C", "xn")
    b.nmos("s", "c_n", "x")
    b.nmos("sn", "C", "x")
    b.nmos("sn", "c_n", "xn")
    # co = x ? C : A and its complement
    b.nmos("co", "x", "C")
    b.nmos("co", "xn", "A")
    b.nmos("con", "x", "c_n")
    b.nmos("con", "xn", "A_b")
    b.inverter("Sum", "sn")
    b.inverter("Sum_b", "s")
    b.inverter("Carry", "con")
    b.inverter("Carry_b", "co")
    if optional_pmos:
        # level restorers on the xor pair
        b.pmos("x", "xn", "vdd")
        b.pmos("xn", "x", "vdd")
    return b.build()


def _tgate() -> Netlist:
    b = NetlistBuilder("tgate")
    _dc_rails(b)
    _pins(b, "ABC", ["Sum", "Carry"])
    b.inverter("a_n", "A")
    b.inverter("b_n", "B")
    b.inverter("c_n", "C")
    b.tgate("B", "p", "a_n", "A")
    b.tgate("b_n", "p", "A", "a_n")
    b.inverter("p_n", "p")
    b.tgate("c_n", "Sum", "p", "p_n")
    b.tgate("C", "Sum", "p_n", "p")
    b.tgate("C", "Carry", "p", "p_n")
    b.tgate("A", "Carry", "p_n", "p")
    return b.build()


def _serf() -> Netlist:
    b = NetlistBuilder("serf")
    _dc_rails(b)
    _pins(b, "ABC", ["Sum", "Carry"])
    b.inverter("a_n", "A")
    b.nmos("xn", "B", "A")
    b.pmos("xn", "B", "a_n")
    b.nmos("x", "B", "a_n")
    b.pmos("x", "B", "A")
    b.nmos("Sum", "C", "xn")
    b.pmos("Sum", "C", "x")
    b.nmos("Carry", "xn", "A")
    b.pmos("Carry", "xn", "C")
    return b.build()


def _pal() -> Netlist:
    b = NetlistBuilder("pal")
    _clock_rails(b)
    _pins(b, ["A", "B", "C", "A_b", "B_b", "C_b"], ["Sum", "Carry"])
    # Bridged pass network: the power clock is the only source and every
    # gate is a primary input, so outputs discharge through the same path
    # during recovery. Sum and Carry share k but never conflict.
    b.nmos("a1", "A", "pclk")
    b.nmos("a0", "A_b", "pclk")
    b.nmos("k", "C", "a0")
    b.nmos("m", "C_b", "a0")
    b.nmos("k", "C_b", "a1")
    b.nmos("Carry", "C", "a1")
    b.nmos("Carry", "B", "k")
    b.nmos("Sum", "B_b", "k")
    b.nmos("Sum", "B", "m")
    b.nmos("Sum", "A", "a0")
    return b.build()


def _pfal_gate(b: NetlistBuilder, out: str, out_b: str):
    b.pmos(out, out_b, "pclk")
    b.pmos(out_b, out, "pclk")
    b.nmos(out, out_b, "gnd")
    b.nmos(out_b, out, "gnd")


def _decode_tree(b: NetlistBuilder, prefix: str, leaves, link):
    """Full A/B decode from the power clock; ``leaves`` maps (a, b) to [(c_pin, target)]."""
    lit = {("A", 1): "A", ("A", 0): "A_b", ("B", 1): "B", ("B", 0): "B_b",
           ("C", 1): "C", ("C", 0): "C_b"}
    for a in (1, 0):
        na = f"{prefix}{a}"
        link("pclk", na, lit["A", a])
        for bb in (1, 0):
            nab = f"{prefix}{a}{bb}"
            link(na, nab, lit["B", bb])
            for c, target in leaves[a, bb]:
                link(nab, target, lit["C", c])


def _pfal() -> Netlist:
    b = NetlistBuilder("pfal")
    _clock_rails(b)
    _pins(b, ["A", "B", "C", "A_b", "B_b", "C_b"], ["Sum", "Carry", "Sum_b", "Carry_b"])

    def nlink(u, v, g):
        b.nmos(v, g, u)

    # F and /F of the sum gate: separate decode trees, one leaf per minterm
    for prefix, out, parity in (("sf", "Sum", 1), ("sg", "Sum_b", 0)):
        leaves = {(a, bb): [(c, out) for c in (0, 1) if (a ^ bb ^ c) == parity]
                  for a in (0, 1) for bb in (0, 1)}
        _decode_tree(b, prefix, leaves, nlink)
    _pfal_gate(b, "Sum", "Sum_b")
    # F = AB + C(A+B), /F = A'B' + C'(A'+B')
    for out, a, bb, c, k in (("Carry", "A", "B", "C", "cf"), ("Carry_b", "A_b", "B_b", "C_b", "cg")):
        b.nmos(f"{k}1", a, "pclk")
        b.nmos(out, bb, f"{k}1")
        b.nmos(f"{k}2", c, "pclk")
        b.nmos(out, a, f"{k}2")
        b.nmos(out, bb, f"{k}2")
    _pfal_gate(b, "Carry", "Carry_b")
    return b.build()


def _tgal() -> Netlist:
    b = NetlistBuilder("tgal")
    _clock_rails(b)
    _pins(b, ["A", "B", "C", "A_b", "B_b", "C_b"], ["Sum", "Carry", "Sum_b", "Carry_b"])

    def tlink(u, v, g):
        b.tgate(u, v, g, g + "_b" if not g.endswith("_b") else g[:-2])

    def leaves(fn, out, out_b):
        return {(a, bb): [(c, out if fn(a, bb, c) else out_b) for c in (1, 0)]
                for a in (0, 1) for bb in (0, 1)}

    _decode_tree(b, "ts", leaves(lambda a, bb, c: a ^ bb ^ c, "Sum", "Sum_b"), tlink)
    b.nmos("Sum", "Sum_b", "gnd")
    b.nmos("Sum_b", "Sum", "gnd")
    _decode_tree(b, "tc", leaves(lambda a, bb, c: (a + bb + c) >= 2, "Carry", "Carry_b"), tlink)
    b.nmos("Carry", "Carry_b", "gnd")
    b.nmos("Carry_b", "Carry", "gnd")
    return b.build()


_BUILDERS = {
    AdderKind.CMOS28: _cmos28,
    AdderKind.TGATE: _tgate,
    AdderKind.PAL: _pal,
    AdderKind.PFAL: _pfal,
    AdderKind.TGAL: _tgal,
    AdderKind.SERF: _serf,
}


def build(kind: AdderKind | str, *, cpl_optional_pmos: bool = False) -> AdderSpec:
    kind = AdderKind(kind)
    if kind is AdderKind.CPL:
        netlist = _cpl(cpl_optional_pmos)
        expected = EXPECTED_DEVICES[kind] + (CPL_OPTIONAL_PMOS if cpl_optional_pmos else 0)
    else:
        netlist = _BUILDERS[kind]()
        expected = EXPECTED_DEVICES[kind]
    return AdderSpec(kind, netlist, expected, REGIME[kind],
                     cpl_optional_pmos and kind is AdderKind.CPL)


def fixture_name(kind: AdderKind, cpl_optional_pmos: bool = False) -> str:
    return "cpl24" if kind is AdderKind.CPL and cpl_optional_pmos else kind.value


def circuits_dir() -> Path:
    return Path(os.environ.get(CIRCUITS_ENV) or CIRCUITS_DIR)


def load_fixture(name: str, directory: Path | None = None) -> Netlist:
    path = (directory or circuits_dir()) / f"{name}.net"
    return parse_netlist(path.read_text())


def write_fixtures(directory: Path) -> list[Path]:
    """Regenerate every fixture file from the builders."""
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for kind in AdderKind:
        for optional in ((False, True) if kind is AdderKind.CPL else (False,)):
            name = fixture_name(kind, optional)
            path = directory / f"{name}.net"
            path.write_text(serialize_netlist(build(kind, cpl_optional_pmos=optional).netlist, DESCRIPTIONS[name]))
            written.append(path)
    return written


def spec_from_netlist(netlist: Netlist, kind: AdderKind | None = None) -> AdderSpec:
    """Wrap an arbitrary netlist so the harness can drive it."""
    regime = SupplyRegime.POWER_CLOCK if netlist.is_power_clocked else SupplyRegime.DC
    if kind is None:
        try:
            kind = AdderKind(netlist.name.lower())
        except ValueError:
            kind = AdderKind.CPL if netlist.name.lower() == "cpl24" else None
    optional = netlist.name.lower() == "cpl24"
    expected = len(netlist.devices)
    return AdderSpec(kind, netlist, expected, regime, optional)  # type: ignore[arg-type]


# --------------------------------------------------------------------------
# functional verification

def full_adder(a: int, b: int, c: int) -> tuple[int, int]:
    return a ^ b ^ c, (a & b) | (b & c) | (c & a)


@dataclass
class RowCheck:
    inputs: tuple[int, ...]
    outputs: dict[str, NodeState]
    expected: dict[str, int]
    passed: bool


@dataclass
class VerificationReport:
    circuit: str
    rows: list[RowCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(r.passed for r in self.rows)

    def format(self) -> str:
        names = list(self.rows[0].outputs) if self.rows else []
        lines = [" ".join(["A", "B", "C"] + [f"{n:>8}" for n in names] + ["  result"])]
        for r in self.rows:
            cells = [str(b) for b in r.inputs]
            cells += [f"{str(r.outputs[n]) + ('*' if r.outputs[n].retained else ''):>8}" for n in names]
            cells.append("  PASS" if r.passed else "  FAIL")
            lines.append(" ".join(cells))
        lines.append("(d = degraded level, * = held by retained charge)")
        return "\n".join(lines)


def _expected_outputs(netlist: Netlist, a: int, b: int, c: int) -> dict[str, int]:
    s, co = full_adder(a, b, c)
    want = {}
    for name in netlist.output_names:
        key = name.lower()
        base, neg = (key[:-2], True) if key.endswith("_b") else (key, False)
        if base in ("sum", "s"):
            want[name] = s ^ neg
        elif base in ("carry", "cout", "co"):
            want[name] = co ^ neg
    if len(want) < 2 and len(netlist.outputs) >= 2:
        first, second = netlist.output_names[:2]
        want = {first: s, second: co}
    return want


def verify_netlist(netlist: Netlist, cfg: EvalConfig = EvalConfig(), *, warm: bool = False,
                   circuit: str | None = None) -> VerificationReport:
    """Check Sum = A xor B xor C and Carry = majority on all eight rows.

    Outputs named ``<out>_b`` are checked as complements.  The check is at
    value level; degraded strength still passes.
    """
    if len(independent_inputs(netlist)) != 3:
        raise ValueError(f"{netlist.name}: a full adder needs exactly three independent inputs")
    table = truth_table(netlist, cfg, warm=warm)
    report = VerificationReport(circuit or netlist.name)
    for row in table.rows:
        want = _expected_outputs(netlist, *row.inputs)
        outs = dict(zip(table.output_names, row.outputs))
        ok = bool(want) and all(outs[name].bit == bit for name, bit in want.items())
        report.rows.append(RowCheck(row.inputs, outs, want, ok))
    return report


def verify_function(spec: AdderSpec, cfg: EvalConfig = EvalConfig(), *, warm: bool = False) -> VerificationReport:
    return verify_netlist(spec.netlist, cfg, warm=warm, circuit=spec.name)


def outputs_are_definite(report: VerificationReport) -> bool:
    return all(s.value in (LogicValue.ZERO, LogicValue.ONE) for r in report.rows for s in r.outputs.values())
