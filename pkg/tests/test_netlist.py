import pytest
from hypothesis import given, settings, strategies as st

from adiasim.adders import AdderKind, build
from adiasim.netlist import (
    DeviceKind,
    DuplicateName,
    InvalidValue,
    MissingRail,
    NetlistBuilder,
    NetlistError,
    NetlistSyntaxError,
    NodeRole,
    UnknownNode,
    parse_netlist,
    parse_value,
    serialize_netlist,
    validate,
)

INVERTER = """\
* simple inverter
.NAME inv
.NODE vdd ROLE=VDD
.NODE gnd ROLE=GND
.NODE in ROLE=IN
.NODE out C=20f ROLE=OUT
M1 out in vdd vdd P R=10k
M2 out in gnd gnd N
"""


def test_parse_inverter_fields():
    n = parse_netlist(INVERTER)
    assert n.name == "inv"
    assert len(n.devices) == 2
    p = n.devices[0]
    assert p.kind is DeviceKind.PMOS
    assert p.on_resistance == 10000.0
    assert n.node_name(p.drain) == "out" and n.node_name(p.gate) == "in" and n.node_name(p.source) == "vdd"
    assert n.nodes[n.node_id("out")].capacitance == pytest.approx(20e-15)
    assert n.input_names == ["in"] and n.output_names == ["out"]
    assert validate(n) == []


def test_default_resistance_applies():
    n = parse_netlist(INVERTER.replace(".NAME inv", ".NAME inv\n.DEFAULT R=4.7k"))
    assert n.devices[1].on_resistance == 4700.0
    assert n.devices[0].on_resistance == 10000.0


def test_keywords_and_names_are_case_insensitive():
    text = INVERTER.lower().replace("m1 out", "M1 OUT")
    n = parse_netlist(text)
    assert n.node_id("OUT") == n.node_id("out")


@pytest.mark.parametrize("text, value", [("10k", 1e4), ("20f", 20e-15), ("1meg", 1e6), ("2.5", 2.5),
                                         ("3e-3", 3e-3), ("1M", 1e-3), (".5p", 0.5e-12)])
def test_parse_value_suffixes(text, value):
    assert parse_value(text) == pytest.approx(value)


def test_duplicate_node_reports_location():
    with pytest.raises(DuplicateName) as e:
        parse_netlist(INVERTER + ".NODE OUT\n")
    assert e.value.line == 9 and e.value.column == 7


def test_unknown_node():
    with pytest.raises(UnknownNode):
        parse_netlist(INVERTER + "M3 out nowhere gnd N\n")


@pytest.mark.parametrize("bad", ["M3 out in gnd N R=0", "M3 out in gnd N R=-5k", ".NODE y C=-1f",
                                 "M3 out in out N"])
def test_invalid_values(bad):
    with pytest.raises(InvalidValue):
        parse_netlist(INVERTER + bad + "\n")


@pytest.mark.parametrize("bad", ["M3 out in gnd Q", ".BOGUS", "X1 a b", "M3 out in", ".NODE 9x",
                                 ".NODE y ROLE=FOO", ".NODE y C"])
def test_syntax_errors(bad):
    with pytest.raises(NetlistSyntaxError):
        parse_netlist(INVERTER + bad + "\n")


def test_missing_rails():
    with pytest.raises(MissingRail):
        parse_netlist(INVERTER.replace(".NODE gnd ROLE=GND", ".NODE gnd"))
    with pytest.raises(MissingRail):
        parse_netlist(INVERTER.replace(".NODE vdd ROLE=VDD", ".NODE vdd"))
    with pytest.raises(MissingRail):
        parse_netlist(INVERTER + ".NODE gnd2 ROLE=GND\n")


def test_pin_lists_assign_roles_and_order():
    text = INVERTER + ".NODE in2\n.INPUTS in2 in\n"
    n = parse_netlist(text)
    assert n.input_names == ["in2", "in"]
    assert n.nodes[n.node_id("in2")].role is NodeRole.INPUT


def test_cmos_adder_text_has_28_devices():
    text = serialize_netlist(build(AdderKind.CMOS28).netlist)
    assert len(parse_netlist(text).devices) == 28


def test_serf_serializes_to_ten_devices():
    assert len(parse_netlist(serialize_netlist(build(AdderKind.SERF).netlist)).devices) == 10


def test_serialize_never_raises_on_empty_netlist():
    b = NetlistBuilder("empty")
    b.node("vdd", role=NodeRole.SUPPLY)
    b.node("gnd", role=NodeRole.GROUND)
    n = b.build()
    text = serialize_netlist(n)
    assert parse_netlist(text) == n
    assert [d.code for d in validate(n)] == ["NoDevices"]


def test_validate_floating_node():
    n = parse_netlist(INVERTER + ".NODE lonely\n")
    diags = validate(n)
    assert [(d.code, d.element) for d in diags] == [("FloatingNode", "lonely")]


def test_validate_zero_load():
    n = parse_netlist(INVERTER.replace("C=20f ", ""))
    assert [d.code for d in validate(n)] == ["ZeroLoadCapacitance"]


def test_with_output_load():
    n = parse_netlist(INVERTER).with_output_load(5e-15)
    assert n.nodes[n.node_id("out")].capacitance == 5e-15
    assert n.nodes[n.node_id("in")].capacitance == 0


def test_comment_lines_in_serialized_text():
    n = parse_netlist(INVERTER)
    text = serialize_netlist(n, "first line\nsecond line")
    assert "* second line" in text
    assert parse_netlist(text) == n


@given(st.text(max_size=300))
@settings(max_examples=300, deadline=None)
def test_parser_is_total(text):
    try:
        parse_netlist(text)
    except NetlistError as e:
        assert e.line >= 0 and e.column >= 0


line = st.sampled_from([".NAME x", ".NODE a", ".NODE b C=1f", ".NODE vdd ROLE=VDD", ".NODE gnd ROLE=GND",
                        "M1 a b gnd N", "M2 a b vdd P R=1k", ".INPUTS b", ".OUTPUTS a", "M3 a a gnd N",
                        ".DEFAULT R=2k", "* hi", ".NODE p ROLE=PCLK", "M4 a vdd b p N", "M1 a b gnd x N"])


@given(st.lists(line, max_size=12))
@settings(max_examples=300, deadline=None)
def test_parser_is_total_on_plausible_lines(lines):
    try:
        parse_netlist("\n".join(lines))
    except NetlistError:
        pass


@st.composite
def netlists(draw):
    b = NetlistBuilder(draw(st.sampled_from(["a", "circuit", "x_1"])),
                       draw(st.floats(1.0, 1e6, allow_nan=False)))
    b.node("vdd", role=draw(st.sampled_from([NodeRole.SUPPLY, NodeRole.POWER_CLOCK])))
    b.node("gnd", role=NodeRole.GROUND)
    names = ["n%d" % k for k in range(draw(st.integers(1, 6)))]
    for name in names:
        b.node(name, draw(st.sampled_from([0.0, 1e-15, 2.5e-14])),
               draw(st.sampled_from([NodeRole.INTERNAL, NodeRole.INPUT, NodeRole.OUTPUT])))
    pool = names + ["vdd", "gnd"]
    for _ in range(draw(st.integers(0, 8))):
        d, s = draw(st.lists(st.sampled_from(pool), min_size=2, max_size=2, unique=True))
        r = draw(st.none() | st.floats(1.0, 1e7, allow_nan=False))
        b.mos(draw(st.sampled_from(list(DeviceKind))), d, draw(st.sampled_from(pool)), s, r)
    return b.build()


@given(netlists())
@settings(max_examples=200, deadline=None)
def test_round_trip(n):
    assert parse_netlist(serialize_netlist(n)) == n
