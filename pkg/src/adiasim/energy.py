"""Energy and power formulas for conventional and adiabatic switching.

Conventional CMOS charges a load abruptly from a DC rail and loses
half of the delivered energy in the channel regardless of its
resistance.  Adiabatic charging ramps the supply slowly, so the channel
only drops a small voltage and the loss falls as the ramp lengthens.
A non-adiabatic penalty applies whenever a switch closes across a
voltage difference.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Union

__all__ = [
    "DcStep", "Ramp", "Stepwise", "ConstantCurrent", "SupplyWaveform",
    "OperatingPoint", "PowerBreakdown", "Direction", "TransitionEvent",
    "EnergyTag", "EventEnergy", "EnergyReport", "ZeroCapacitance",
    "conventional_power", "conventional_event_energy", "cc_voltage",
    "cc_dissipation", "ramp_dissipation", "stepwise_dissipation",
    "event_energy", "build_report",
]


class ZeroCapacitance(ValueError):
    """A capacitance of zero was given where a voltage must be derived from charge."""


def _positive(name: str, value: float):
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite, got {value}")


def _non_negative(name: str, value: float):
    if not (value >= 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be non-negative and finite, got {value}")


# -- supply waveforms ---------------------------------------------------------

@dataclass(frozen=True)
class DcStep:
    vdd: float

    def __post_init__(self):
        _positive("vdd", self.vdd)


@dataclass(frozen=True)
class Ramp:
    """Linear ramp of duration ``ramp_time`` inside a clock ``period``."""

    vdd: float
    ramp_time: float
    period: float

    def __post_init__(self):
        _positive("vdd", self.vdd)
        _positive("ramp_time", self.ramp_time)
        _positive("period", self.period)
        if self.ramp_time > self.period / 2:
            raise ValueError("charge and recover ramps must both fit in one period")


@dataclass(frozen=True)
class Stepwise:
    vdd: float
    steps: int
    period: float

    def __post_init__(self):
        _positive("vdd", self.vdd)
        _positive("period", self.period)
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be an integer >= 1, got {self.steps}")


@dataclass(frozen=True)
class ConstantCurrent:
    i_s: float
    duration: float

    def __post_init__(self):
        _positive("i_s", self.i_s)
        _positive("duration", self.duration)


SupplyWaveform = Union[DcStep, Ramp, Stepwise, ConstantCurrent]


# -- conventional power -------------------------------------------------------

@dataclass(frozen=True)
class OperatingPoint:
    vdd: float
    c_load: float
    f_clk: float
    activity: float = 1.0
    i_sc: float = 0.0
    i_leak: float = 0.0

    def __post_init__(self):
        for name in ("vdd", "c_load", "f_clk", "activity", "i_sc", "i_leak"):
            _non_negative(name, getattr(self, name))
        if self.activity > 1:
            raise ValueError(f"activity must be in [0, 1], got {self.activity}")


@dataclass(frozen=True)
class PowerBreakdown:
    dynamic: float
    short_circuit: float
    leakage: float

    @property
    def total(self) -> float:
        return self.dynamic + self.short_circuit + self.leakage


def conventional_power(op: OperatingPoint) -> PowerBreakdown:
    """Average power of a conventionally clocked node.

    The dynamic term is alpha * C * V**2 * f.  The commonly printed form
    with a single V is dimensionally a current times capacitance, so the
    squared form is used here.
    """
    return PowerBreakdown(
        dynamic=op.activity * op.c_load * op.vdd ** 2 * op.f_clk,
        short_circuit=op.i_sc * op.vdd,
        leakage=op.i_leak * op.vdd,
    )


def conventional_event_energy(c: float, delta_v: float) -> float:
    """Energy lost when a capacitor is switched abruptly through ``delta_v``."""
    return 0.5 * c * delta_v * delta_v


# -- constant-current and ramp charging ---------------------------------------

def cc_voltage(i_s: float, c: float, t: float) -> float:
    """Capacitor voltage after charging at constant current from 0 V."""
    if c == 0:
        raise ZeroCapacitance("cannot charge a zero capacitance")
    return i_s * t / c


def cc_dissipation(r: float, i_s: float, t_total: float) -> float:
    return r * i_s * i_s * t_total


def ramp_dissipation(r: float, c: float, t_ramp: float, v_final: float) -> float:
    """Loss in ``r`` when ``c`` follows a linear ramp to ``v_final`` over ``t_ramp``.

    Equals the conventional ``0.5*C*V**2`` exactly at ``t_ramp == 2*r*c``
    and falls as ``1/t_ramp`` beyond that.
    """
    if not t_ramp > 0:
        raise ValueError(f"t_ramp must be positive, got {t_ramp}")
    return (r * c / t_ramp) * c * v_final * v_final


def stepwise_dissipation(c: float, vdd: float, n: int) -> float:
    if n < 1:
        raise ValueError(f"step count must be >= 1, got {n}")
    return 0.5 * c * vdd * vdd / n


# -- transition events --------------------------------------------------------

class Direction(enum.Enum):
    CHARGE = "charge"
    DISCHARGE = "discharge"


class EnergyTag(enum.Enum):
    DYNAMIC = "dynamic"
    ADIABATIC = "adiabatic"
    NON_ADIABATIC = "non_adiabatic"


@dataclass(frozen=True)
class TransitionEvent:
    """One node moving by ``delta_v`` through a path of resistance ``r_path``.

    ``v_mismatch`` is the voltage across the switch at the moment it turns
    on, relevant only for ramped supplies.
    """

    node: int
    c: float
    delta_v: float
    r_path: float
    supply: SupplyWaveform
    direction: Direction
    v_mismatch: float = 0.0
    name: str = ""

    def __post_init__(self):
        _non_negative("c", self.c)
        if not (self.r_path > 0):
            raise ValueError(f"r_path must be positive or infinite, got {self.r_path}")


@dataclass(frozen=True)
class EventEnergy:
    """Energy of one event, split by origin."""

    dynamic: float = 0.0
    adiabatic: float = 0.0
    non_adiabatic: float = 0.0

    @property
    def total(self) -> float:
        return self.dynamic + self.adiabatic + self.non_adiabatic

    @property
    def tags(self) -> frozenset[EnergyTag]:
        return frozenset(t for t, v in ((EnergyTag.DYNAMIC, self.dynamic),
                                        (EnergyTag.ADIABATIC, self.adiabatic),
                                        (EnergyTag.NON_ADIABATIC, self.non_adiabatic)) if v > 0)


def event_energy(e: TransitionEvent) -> EventEnergy:
    if math.isinf(e.r_path):
        return EventEnergy()
    s = e.supply
    if isinstance(s, DcStep):
        return EventEnergy(dynamic=conventional_event_energy(e.c, e.delta_v))
    if isinstance(s, Ramp):
        return EventEnergy(
            adiabatic=ramp_dissipation(e.r_path, e.c, s.ramp_time, e.delta_v),
            non_adiabatic=conventional_event_energy(e.c, e.v_mismatch),
        )
    if isinstance(s, Stepwise):
        return EventEnergy(adiabatic=stepwise_dissipation(e.c, abs(e.delta_v), s.steps))
    if isinstance(s, ConstantCurrent):
        return EventEnergy(adiabatic=cc_dissipation(e.r_path, s.i_s, s.duration))
    raise TypeError(f"unknown supply waveform {s!r}")


# -- reports ------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyReport:
    total: float
    dynamic: float
    adiabatic_loss: float
    non_adiabatic_loss: float
    short_circuit: float
    leakage: float
    events: tuple[tuple[TransitionEvent, EventEnergy], ...] = field(default=())
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "total_j": self.total,
            "dynamic_j": self.dynamic,
            "adiabatic_loss_j": self.adiabatic_loss,
            "non_adiabatic_loss_j": self.non_adiabatic_loss,
            "short_circuit_j": self.short_circuit,
            "leakage_j": self.leakage,
            "events": [
                {
                    "node": ev.name or ev.node,
                    "direction": ev.direction.value,
                    "c_f": ev.c,
                    "delta_v_v": ev.delta_v,
                    "r_path_ohm": None if math.isinf(ev.r_path) else ev.r_path,
                    "v_mismatch_v": ev.v_mismatch,
                    "energy_j": en.total,
                }
                for ev, en in self.events
            ],
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def build_report(events, short_circuit: float = 0.0, leakage: float = 0.0, notes=()) -> EnergyReport:
    """Sum per-event energies into a report; static terms are given in joules.

    ``notes`` carries the modelling assumptions behind the numbers.
    """
    pairs = tuple((e, event_energy(e)) for e in events)
    dyn = math.fsum(en.dynamic for _, en in pairs)
    adi = math.fsum(en.adiabatic for _, en in pairs)
    non = math.fsum(en.non_adiabatic for _, en in pairs)
    total = math.fsum((dyn, adi, non, short_circuit, leakage))
    return EnergyReport(total, dyn, adi, non, short_circuit, leakage, pairs, tuple(notes))
