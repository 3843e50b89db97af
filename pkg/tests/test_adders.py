import itertools

import pytest

from adiasim.adders import (
    AdderKind,
    CIRCUITS_DIR,
    SupplyRegime,
    build,
    fixture_name,
    full_adder,
    load_fixture,
    outputs_are_definite,
    verify_function,
    verify_netlist,
    write_fixtures,
)
from adiasim.netlist import DeviceKind, NetlistBuilder, NodeRole, parse_netlist, serialize_netlist, validate
from adiasim.switch_eval import LogicValue, Strength, evaluate, expand_inputs, states_by_name

# ascending binary order of (A, B, C)
SUM_TABLE = (0, 1, 1, 0, 1, 0, 0, 1)
CARRY_TABLE = (0, 0, 0, 1, 0, 1, 1, 1)
ROWS = list(itertools.product((0, 1), repeat=3))
COUNTS = {"cmos28": 28, "cpl": 22, "tgate": 20, "pal": 10, "pfal": 38, "tgal": 60, "serf": 10}


def test_reference_table():
    assert tuple(full_adder(*r)[0] for r in ROWS) == SUM_TABLE
    assert tuple(full_adder(*r)[1] for r in ROWS) == CARRY_TABLE


def test_algebraic_forms_agree():
    # minterm, factored and shared-term forms, with their complement bars restored
    def minterm(a, b, c):
        na, nb, nc = 1 - a, 1 - b, 1 - c
        return (na & nb & c) | (a & nb & nc) | (na & b & nc) | (a & b & c)

    def factored(a, b, c):
        carry = (a & b) | (b & c) | (c & a)
        return (a & b & c) | ((a | b | c) & (1 - carry))

    def shared(a, b, c):
        x = a ^ b
        return (x & (1 - c)) | ((1 - x) & c), (x & c) | ((1 - x) & b)

    assert tuple(minterm(*r) for r in ROWS) == SUM_TABLE
    assert tuple(factored(*r) for r in ROWS) == SUM_TABLE
    assert tuple(shared(*r)[0] for r in ROWS) == SUM_TABLE
    assert tuple(shared(*r)[1] for r in ROWS) == CARRY_TABLE


@pytest.mark.parametrize("kind", list(AdderKind))
def test_counts_regime_and_validity(kind):
    spec = build(kind)
    assert len(spec.netlist.devices) == COUNTS[kind.value] == spec.expected_devices
    assert validate(spec.netlist) == []
    clocked = kind in (AdderKind.PAL, AdderKind.PFAL, AdderKind.TGAL)
    assert spec.supply_regime is (SupplyRegime.POWER_CLOCK if clocked else SupplyRegime.DC)
    assert spec.netlist.is_power_clocked == clocked
    assert spec.netlist.input_names[:3] == ["A", "B", "C"]
    assert spec.netlist.output_names[:2] == ["Sum", "Carry"]


def test_cpl_optional_pmos():
    spec = build(AdderKind.CPL, cpl_optional_pmos=True)
    assert len(spec.netlist.devices) == spec.expected_devices == 24
    assert spec.cpl_optional_pmos
    a = verify_function(build(AdderKind.CPL))
    b = verify_function(spec)
    assert [[s.value for s in r.outputs.values()] for r in a.rows] == \
           [[s.value for s in r.outputs.values()] for r in b.rows]


@pytest.mark.parametrize("kind", list(AdderKind))
@pytest.mark.parametrize("warm", [False, True])
def test_truth_table(kind, warm):
    report = verify_function(build(kind), warm=warm)
    assert report.passed, report.format()
    assert outputs_are_definite(report)


def test_cmos_outputs_strong():
    report = verify_function(build(AdderKind.CMOS28))
    assert all(s.strength is Strength.STRONG for r in report.rows for s in r.outputs.values())


def test_serf_row_110():
    n = build(AdderKind.SERF).netlist
    s = states_by_name(n, evaluate(n, expand_inputs(n, (1, 1, 0))))
    assert s["Sum"].value is LogicValue.ZERO and s["Carry"].value is LogicValue.ONE


def _cross_coupled_pairs(n, kind):
    pairs = set()
    for d1 in n.devices:
        for d2 in n.devices:
            if d1 is d2 or d1.kind is not kind or d2.kind is not kind:
                continue
            if d1.drain == d2.gate and d2.drain == d1.gate and d1.source == d2.source:
                pairs.add(frozenset((d1.drain, d2.drain)))
    return pairs


def test_pfal_has_two_cross_coupled_inverter_pairs():
    n = build(AdderKind.PFAL).netlist
    p = _cross_coupled_pairs(n, DeviceKind.PMOS)
    nn = _cross_coupled_pairs(n, DeviceKind.NMOS)
    assert p == nn and len(p) == 2
    names = {frozenset(n.node_name(i) for i in pair) for pair in p}
    assert names == {frozenset({"Sum", "Sum_b"}), frozenset({"Carry", "Carry_b"})}


@pytest.mark.parametrize("kind", [AdderKind.PFAL, AdderKind.TGAL])
def test_dual_rail_outputs_complementary(kind):
    report = verify_function(build(kind), warm=True)
    for row in report.rows:
        o = row.outputs
        assert o["Sum"].value is not o["Sum_b"].value
        assert o["Carry"].value is not o["Carry_b"].value


def test_stuck_output_fails_verification():
    b = NetlistBuilder("broken")
    b.node("vdd", role=NodeRole.SUPPLY)
    b.node("gnd", role=NodeRole.GROUND)
    for name in "ABC":
        b.node(name, role=NodeRole.INPUT)
    b.node("Sum", 20e-15, NodeRole.OUTPUT)
    b.node("Carry", 20e-15, NodeRole.OUTPUT)
    b.nmos("Sum", "vdd", "gnd")          # stuck at 0
    b.nmos("Carry", "A", "gnd")
    report = verify_netlist(b.build())
    assert not report.passed
    assert "FAIL" in report.format()


@pytest.mark.parametrize("name", ["cmos28", "cpl", "cpl24", "tgate", "pal", "pfal", "tgal", "serf"])
def test_fixtures_match_builders(name):
    kind = AdderKind.CPL if name == "cpl24" else AdderKind(name)
    built = build(kind, cpl_optional_pmos=name == "cpl24").netlist
    fixture = load_fixture(name, CIRCUITS_DIR)
    assert fixture == built
    assert parse_netlist(serialize_netlist(fixture)) == fixture


def test_fixture_writer_is_reproducible(tmp_path):
    written = write_fixtures(tmp_path)
    assert len(written) == 8
    for path in written:
        assert path.read_bytes() == (CIRCUITS_DIR / path.name).read_bytes()


def test_fixture_names():
    assert fixture_name(AdderKind.CPL, True) == "cpl24"
    assert fixture_name(AdderKind.PFAL) == "pfal"
