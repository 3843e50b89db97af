"""Simulation driver: input stimulus, per-cycle energy, power meters and sweeps.

Each clock cycle is traced once at switch level and turned into a list of
frequency-independent charge movements.  Applying a frequency then only
decides whether each movement is an abrupt step or rides a supply ramp of
duration ``ramp_fraction / f``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .adders import AdderKind, AdderSpec, SupplyRegime, build
from .energy import (
    DcStep,
    Direction,
    EnergyReport,
    Ramp,
    TransitionEvent,
    build_report,
)
from .netlist import Netlist, NodeRole
from .resistnet import effective_resistance, from_on_switches
from .switch_eval import (
    CLOCK_SEQUENCE,
    EvalConfig,
    LogicValue,
    NodeState,
    Phase,
    evaluate,
    expand_inputs,
    reset_state,
    run_phases,
    source_values,
)

__all__ = [
    "RAMP_FRACTION",
    "R_NOTE",
    "PLAN_NOTE",
    "Vector",
    "all_transitions",
    "StimulusPlan",
    "MeterMode",
    "PowerMeterConfig",
    "Movement",
    "trace_cycle",
    "run_cycle",
    "cycle_energies",
    "average_power",
    "SweepPoint",
    "SweepResult",
    "frequency_sweep",
    "ComparisonRow",
    "comparison_table",
    "comparison_csv",
    "fmt9",
]

RAMP_FRACTION = 0.25
R_NOTE = "path resistance recomputed for every transition from the on-switches of that input vector"
PLAN_NOTE = "every circuit driven by the same stimulus plan"

Vector = tuple[int, int, int]

# source roles in the order we prefer them as the supplier of a transition
_DRIVER_PRIORITY = (NodeRole.POWER_CLOCK, NodeRole.SUPPLY, NodeRole.GROUND, NodeRole.INPUT)
# phases entered while the power clock ramps
_RAMP_PHASES = frozenset({Phase.EVALUATE, Phase.RECOVER})


def fmt9(x: float) -> str:
    """Nine significant digits, the format used by every CSV output."""
    return f"{x:.9g}"


# -- stimulus -----------------------------------------------------------------

def all_transitions() -> tuple[Vector, ...]:
    """Vector sequence whose consecutive pairs are each ordered pair exactly once.

    An Eulerian circuit over the complete directed graph on the eight 3-bit
    vectors, self loops included: 65 vectors, 64 transitions.
    """
    vectors = [tuple((v >> k) & 1 for k in (2, 1, 0)) for v in range(8)]
    unused = {v: list(reversed(vectors)) for v in vectors}
    stack, circuit = [vectors[0]], []
    while stack:
        v = stack[-1]
        if unused[v]:
            stack.append(unused[v].pop())
        else:
            circuit.append(stack.pop())
    return tuple(reversed(circuit))


@dataclass(frozen=True)
class StimulusPlan:
    input_sequence: tuple[Vector, ...] = field(default_factory=all_transitions)
    cycles_per_vector: int = 1
    f_clk: float = 50e6

    def __post_init__(self):
        seq = tuple(tuple(int(b) for b in v) for v in self.input_sequence)
        object.__setattr__(self, "input_sequence", seq)
        if not seq:
            raise ValueError("input sequence must not be empty")
        for v in seq:
            if len(v) != 3 or any(b not in (0, 1) for b in v):
                raise ValueError(f"input vectors must be three bits, got {v}")
        if self.cycles_per_vector < 1:
            raise ValueError("cycles_per_vector must be at least 1")
        if not (self.f_clk > 0 and math.isfinite(self.f_clk)):
            raise ValueError(f"f_clk must be positive, got {self.f_clk}")

    def at(self, f_clk: float) -> "StimulusPlan":
        return StimulusPlan(self.input_sequence, self.cycles_per_vector, f_clk)

    def transitions(self) -> list[tuple[Vector, Vector]]:
        """(from, to) per simulated cycle; the first vector only sets the initial state."""
        out = []
        seq = self.input_sequence
        prev = seq[0]
        for k, v in enumerate(seq):
            if k == 0:
                out.extend([(v, v)] * (self.cycles_per_vector - 1))
                continue
            out.append((prev, v))
            out.extend([(v, v)] * (self.cycles_per_vector - 1))
            prev = v
        if not out:  # a single vector held for one cycle
            out.append((seq[0], seq[0]))
        return out


class MeterMode(enum.Enum):
    EXACT = "exact"
    RC = "rc"


@dataclass(frozen=True)
class PowerMeterConfig:
    """Exact energy integration, or a discrete model of a parallel-RC power meter."""

    mode: MeterMode = MeterMode.EXACT
    meter_r: float = 100e3
    meter_c: float = 100e-12

    def __post_init__(self):
        if self.mode is MeterMode.RC and not (self.meter_r > 0 and self.meter_c > 0):
            raise ValueError("the RC meter needs positive meter_r and meter_c")

    def ripple_bound(self, f_clk: float) -> float:
        """Relative reading error bound of the RC meter: one clock period over its time constant."""
        return 1.0 / (f_clk * self.meter_r * self.meter_c)


# -- cycle tracing ------------------------------------------------------------

@dataclass(frozen=True)
class Movement:
    """A node level change, before a frequency is chosen."""

    node: int
    name: str
    c: float
    before: float
    after: float
    r_path: float
    ramped: bool  # supplied by the power clock while it ramps
    phase: Phase | None

    @property
    def direction(self) -> Direction:
        return Direction.CHARGE if self.after > self.before else Direction.DISCHARGE


def _driver_resistance(n: Netlist, states, sources, target: int, value: LogicValue):
    by_role: dict[NodeRole, list[int]] = {}
    for i, v in sources.items():
        if v is value:
            by_role.setdefault(n.nodes[i].role, []).append(i)
    for role in _DRIVER_PRIORITY:
        best = math.inf
        for rail in by_role.get(role, ()):
            best = min(best, effective_resistance(from_on_switches(n, states, rail, target)))
        if math.isfinite(best):
            return role, best
    return None, math.inf


def _movements(n: Netlist, before, after, sources, phase: Phase | None) -> list[Movement]:
    out = []
    for i, node in enumerate(n.nodes):
        # sources are driven externally; uncharged nodes move no energy
        if node.role not in (NodeRole.INTERNAL, NodeRole.OUTPUT) or node.capacitance == 0:
            continue
        b, a = before[i].level, after[i].level
        if a == b:
            continue
        value = LogicValue.ONE if a > b else LogicValue.ZERO
        role, r = _driver_resistance(n, after, sources, i, value)
        ramped = role is NodeRole.POWER_CLOCK and phase in _RAMP_PHASES
        out.append(Movement(i, node.name, node.capacitance, b, a, r, ramped, phase))
    return out


def _dc_state(n: Netlist, vec: Vector, cfg: EvalConfig):
    inputs = expand_inputs(n, vec)
    s = evaluate(n, inputs, cfg)
    return evaluate(n, inputs, cfg, s)


@functools.lru_cache(maxsize=4096)
def _clocked_start(n: Netlist, vec: Vector, cfg: EvalConfig):
    # two periods from the discharged state reach the periodic regime
    state = reset_state(n, cfg)
    inputs = expand_inputs(n, vec)
    for _ in range(2):
        state = run_phases(n, inputs, cfg, state)[-1][1]
    return state


@functools.lru_cache(maxsize=4096)
def trace_cycle(n: Netlist, from_vec: Vector, to_vec: Vector, cfg: EvalConfig) -> tuple[Movement, ...]:
    """Level changes caused by one clock cycle that applies ``to_vec`` after ``from_vec``."""
    from_vec, to_vec = tuple(from_vec), tuple(to_vec)
    if not n.is_power_clocked:
        before = _dc_state(n, from_vec, cfg)
        inputs = expand_inputs(n, to_vec)
        after = evaluate(n, inputs, cfg, before)
        return tuple(_movements(n, before, after, source_values(n, inputs, cfg), None))
    state = _clocked_start(n, from_vec, cfg)
    inputs = expand_inputs(n, to_vec)
    moves: list[Movement] = []
    for phase in CLOCK_SEQUENCE:
        pcfg = cfg.at(phase)
        nxt = evaluate(n, inputs, pcfg, state)
        moves.extend(_movements(n, state, nxt, source_values(n, inputs, pcfg), phase))
        state = nxt
    return tuple(moves)


def _event(m: Movement, vdd: float, f: float, ramp_fraction: float) -> TransitionEvent:
    dv = abs(m.after - m.before)
    if m.ramped:
        period = 1.0 / f
        supply = Ramp(vdd, ramp_fraction * period, period)
        # a rising ramp starts at 0 V: a node sitting above that is dumped first
        mismatch = m.before if m.phase is Phase.EVALUATE and m.before > 0 else 0.0
        return TransitionEvent(m.node, m.c, dv, m.r_path, supply, m.direction, mismatch, m.name)
    return TransitionEvent(m.node, m.c, dv, m.r_path, DcStep(vdd), m.direction, 0.0, m.name)


def run_cycle(
    spec: AdderSpec,
    from_vec: Sequence[int],
    to_vec: Sequence[int],
    f: float,
    cfg: EvalConfig = EvalConfig(),
    *,
    ramp_fraction: float = RAMP_FRACTION,
    i_sc: float = 0.0,
    i_leak: float = 0.0,
) -> EnergyReport:
    """Energy of one cycle switching the inputs from ``from_vec`` to ``to_vec``.

    DC-supplied circuits also accrue ``(i_sc + i_leak) * vdd / f`` of static
    energy.  Power-clocked circuits pay ramp losses every cycle, even when
    the inputs do not change.
    """
    if not (f > 0 and math.isfinite(f)):
        raise ValueError(f"frequency must be positive, got {f}")
    if not 0 < ramp_fraction <= 0.5:
        raise ValueError("ramp_fraction must lie in (0, 0.5]")
    moves = trace_cycle(spec.netlist, tuple(from_vec), tuple(to_vec), cfg)
    events = [_event(m, cfg.vdd, f, ramp_fraction) for m in moves]
    sc = leak = 0.0
    if spec.supply_regime is SupplyRegime.DC:
        sc = i_sc * cfg.vdd / f
        leak = i_leak * cfg.vdd / f
    notes = [R_NOTE]
    if spec.supply_regime is SupplyRegime.POWER_CLOCK:
        notes.append(f"ramp time T = {ramp_fraction:g} of the clock period")
    return build_report(events, sc, leak, notes)


def cycle_energies(spec: AdderSpec, plan: StimulusPlan, cfg: EvalConfig = EvalConfig(), **kw) -> list[float]:
    return [run_cycle(spec, u, v, plan.f_clk, cfg, **kw).total for u, v in plan.transitions()]


def _rc_meter_reading(energies: list[float], f: float, meter: PowerMeterConfig) -> float:
    # Each cycle delivers its mean supply power as a constant current into
    # the parallel RC for one period.  Start from the periodic steady state
    # of the repeating plan and average the end-of-cycle samples.
    r, c = meter.meter_r, meter.meter_c
    d = math.exp(-1.0 / (f * r * c))
    drive = [e * f * r * (1.0 - d) for e in energies]
    v = 0.0
    for x in drive:
        v = v * d + x
    v /= 1.0 - d ** len(drive)
    samples = []
    for x in drive:
        v = v * d + x
        samples.append(v)
    return math.fsum(samples) / len(samples) / r


def average_power(
    spec: AdderSpec,
    plan: StimulusPlan = StimulusPlan(),
    meter: PowerMeterConfig = PowerMeterConfig(),
    cfg: EvalConfig = EvalConfig(),
    **kw,
) -> float:
    energies = cycle_energies(spec, plan, cfg, **kw)
    if meter.mode is MeterMode.RC:
        return _rc_meter_reading(energies, plan.f_clk, meter)
    return math.fsum(energies) * plan.f_clk / len(energies)


# -- sweeps and tables --------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    f_hz: float
    avg_power_w: float
    energy_per_cycle_j: float


@dataclass(frozen=True)
class SweepResult:
    circuit: str
    points: tuple[SweepPoint, ...]

    def slope(self) -> float:
        """Least-squares slope of log(power) against log(frequency)."""
        x = np.log([p.f_hz for p in self.points])
        y = np.log([p.avg_power_w for p in self.points])
        return float(np.polyfit(x, y, 1)[0])

    def to_csv(self, header: bool = True) -> str:
        lines = ["circuit,f_hz,avg_power_w,energy_per_cycle_j"] if header else []
        for p in self.points:
            lines.append(f"{self.circuit},{fmt9(p.f_hz)},{fmt9(p.avg_power_w)},{fmt9(p.energy_per_cycle_j)}")
        return "\n".join(lines) + "\n"


def frequency_sweep(
    spec: AdderSpec,
    f_min: float = 1e6,
    f_max: float = 100e6,
    points: int = 20,
    plan: StimulusPlan = StimulusPlan(),
    cfg: EvalConfig = EvalConfig(),
    **kw,
) -> SweepResult:
    if not 0 < f_min < f_max:
        raise ValueError("need 0 < f_min < f_max")
    if points < 2:
        raise ValueError("a sweep needs at least two points")
    out = []
    for f in np.geomspace(f_min, f_max, points):
        f = float(f)
        p = average_power(spec, plan.at(f), PowerMeterConfig(), cfg, **kw)
        out.append(SweepPoint(f, p, p / f))
    return SweepResult(spec.name, tuple(out))


@dataclass(frozen=True)
class ComparisonRow:
    circuit: str
    devices: int
    avg_power_w: float


def comparison_table(
    kinds: Iterable[AdderKind | AdderSpec],
    plan: StimulusPlan = StimulusPlan(),
    cfg: EvalConfig = EvalConfig(),
    meter: PowerMeterConfig = PowerMeterConfig(),
) -> list[ComparisonRow]:
    specs = [k if isinstance(k, AdderSpec) else build(k) for k in kinds]
    if not specs:
        raise ValueError("comparison needs at least one circuit")
    return [ComparisonRow(s.name, len(s.netlist.devices), average_power(s, plan, meter, cfg)) for s in specs]


def comparison_csv(rows: Sequence[ComparisonRow]) -> str:
    lines = ["circuit,devices,avg_power_w"]
    lines += [f"{r.circuit},{r.devices},{fmt9(r.avg_power_w)}" for r in rows]
    return "\n".join(lines) + "\n"
