"""Switch-level steady-state evaluation.

Every MOS device is an ideal switch with a drive-strength rule: an nMOS
passes a 0 at full strength and a 1 degraded by one threshold, a pMOS the
reverse.  Node values come from which driven sources (rails, power clock,
primary inputs) reach a node through conducting switches, and the
strongest drive wins.  Degradation is single-level: a degraded 1 passed on
through further nMOS devices stays at VDD - Vtn.

Evaluation relaxes synchronously to a fixed point.  Cross-coupled latches
(e.g. positive-feedback adiabatic gates) can oscillate under synchronous
update; the oscillating nodes are then resolved by enumerating their
stable assignments and keeping the one with the fewest fighting nodes.
Several equally good assignments mean the state is ambiguous and the
nodes are reported as X.
"""

from __future__ import annotations

import enum
import functools
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .netlist import DeviceKind, Netlist, NodeRole, SOURCE_ROLES


class LogicValue(enum.Enum):
    ZERO = "0"
    ONE = "1"
    X = "X"
    Z = "Z"

    @classmethod
    def of(cls, v) -> "LogicValue":
        if isinstance(v, LogicValue):
            return v
        if v in (0, 1):  # also covers bools
            return cls.ONE if v else cls.ZERO
        return cls(str(v).upper())


class Strength(enum.Enum):
    STRONG = 2
    DEGRADED = 1


class Phase(enum.Enum):
    EVALUATE = "evaluate"
    HOLD = "hold"
    RECOVER = "recover"
    WAIT = "wait"

    @property
    def clock_high(self) -> bool:
        return self in (Phase.EVALUATE, Phase.HOLD)


# one full power-clock period, starting where inputs are allowed to change
CLOCK_SEQUENCE = (Phase.WAIT, Phase.EVALUATE, Phase.HOLD, Phase.RECOVER)


@dataclass(frozen=True)
class NodeState:
    value: LogicValue
    strength: Strength = Strength.STRONG
    level: float = 0.0
    retained: bool = False  # undriven, holding charge from the previous state

    def __str__(self):
        if self.value in (LogicValue.ONE, LogicValue.ZERO) and self.strength is Strength.DEGRADED:
            return self.value.value + "d"
        return self.value.value

    @property
    def bit(self) -> int | None:
        return {LogicValue.ONE: 1, LogicValue.ZERO: 0}.get(self.value)


@dataclass(frozen=True)
class EvalConfig:
    vdd: float = 1.8
    vtn: float = 0.4
    vtp: float = -0.4
    max_iterations: int | None = None  # None -> 4 x node count
    clock_phase: Phase = Phase.HOLD

    def __post_init__(self):
        if not 0 < self.vtn < self.vdd:
            raise ValueError("need 0 < vtn < vdd")
        if not 0 < abs(self.vtp) < self.vdd:
            raise ValueError("need 0 < |vtp| < vdd")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def at(self, phase: Phase) -> "EvalConfig":
        return EvalConfig(self.vdd, self.vtn, self.vtp, self.max_iterations, phase)

    def level(self, value: LogicValue, strength: Strength) -> float:
        if value is LogicValue.ONE:
            return self.vdd if strength is Strength.STRONG else self.vdd - self.vtn
        if value is LogicValue.ZERO:
            return 0.0 if strength is Strength.STRONG else abs(self.vtp)
        raise ValueError(f"{value} has no nominal level")


class EvalError(Exception):
    row: tuple[int, ...] | None = None


class MissingInput(EvalError):
    pass


class NonConvergence(EvalError):
    def __init__(self, message: str, states: dict[int, NodeState], nodes: list[str]):
        super().__init__(message)
        self.states = states
        self.nodes = nodes


def switch_is_on(kind: DeviceKind, gate: NodeState | LogicValue) -> bool | None:
    """True/False for a definite gate; None ("maybe") for an X or Z gate."""
    value = gate.value if isinstance(gate, NodeState) else gate
    if value is LogicValue.ONE:
        return kind is DeviceKind.NMOS
    if value is LogicValue.ZERO:
        return kind is DeviceKind.PMOS
    return None


# --------------------------------------------------------------------------
# engine

# internal node state during relaxation: (value, strength, retained)
_Z = (LogicValue.Z, Strength.STRONG, False)
_X = (LogicValue.X, Strength.STRONG, False)

_EXACT_MAYBE_LIMIT = 4
_CLUSTER_LIMIT = 10


class _Engine:
    def __init__(self, n: Netlist):
        self.n = n
        self.size = len(n.nodes)
        self.is_source = [node.role in SOURCE_ROLES for node in n.nodes]
        self.adj: list[list[tuple[int, int]]] = [[] for _ in n.nodes]
        for i, d in enumerate(n.devices):
            self.adj[d.source].append((i, d.drain))
            self.adj[d.drain].append((i, d.source))
        self.gate = [d.gate for d in n.devices]
        self.is_n = [d.kind is DeviceKind.NMOS for d in n.devices]
        self.gated_by: list[list[int]] = [[] for _ in n.nodes]
        for i, d in enumerate(n.devices):
            self.gated_by[d.gate].append(i)
        self.internal = [i for i in range(self.size) if not self.is_source[i]]

    # -- channel connectivity ------------------------------------------------

    def region(self, start: Sequence[int], usable) -> set[int]:
        """Non-source nodes reachable from ``start`` through devices accepted by ``usable``."""
        seen = {s for s in start if not self.is_source[s]}
        queue = deque(seen)
        while queue:
            u = queue.popleft()
            for dev, v in self.adj[u]:
                if v not in seen and not self.is_source[v] and usable(dev):
                    seen.add(v)
                    queue.append(v)
        return seen

    def _reach(self, seeds: list[int], on: list[bool], edge_ok) -> set[int]:
        seen: set[int] = set()
        queue = deque()
        for s in seeds:
            for dev, v in self.adj[s]:
                if on[dev] and edge_ok(dev) and not self.is_source[v] and v not in seen:
                    seen.add(v)
                    queue.append(v)
        while queue:
            u = queue.popleft()
            for dev, v in self.adj[u]:
                if on[dev] and edge_ok(dev) and not self.is_source[v] and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen

    def drive(self, sources: dict[int, LogicValue], on: list[bool]) -> tuple[list[int], list[int]]:
        """Best drive strength (0 none, 1 degraded, 2 strong) of a 1 and of a 0 at every node."""
        s1 = [0] * self.size
        s0 = [0] * self.size
        for value, strengths, strong_is_n in ((LogicValue.ONE, s1, False), (LogicValue.ZERO, s0, True)):
            seeds = [i for i, v in sources.items() if v is value]
            if not seeds:
                continue
            for i in self._reach(seeds, on, lambda _d: True):
                strengths[i] = 1
            for i in self._reach(seeds, on, lambda d: self.is_n[d] is strong_is_n):
                strengths[i] = 2
        return s1, s0

    # -- one synchronous update ----------------------------------------------

    def _resolve(self, s1, s0, prev) -> tuple[list, int]:
        out = [None] * self.size
        fights = 0
        for i in self.internal:
            a, b = s1[i], s0[i]
            if a and b:
                fights += 1
            if a > b:
                out[i] = (LogicValue.ONE, Strength(a), False)
            elif b > a:
                out[i] = (LogicValue.ZERO, Strength(b), False)
            elif a:
                out[i] = _X
            elif prev is not None:
                p = prev[i]
                out[i] = (p[0], p[1], True) if p[0] is not LogicValue.Z else _Z
            else:
                out[i] = _Z
        return out, fights

    def step(self, state, sources, prev, frozen=None):
        """Recompute every internal node from switch states implied by ``state``."""
        gate_vals = [s[0] for s in state]
        if frozen:
            for i, v in frozen.items():
                gate_vals[i] = v
        on = [False] * len(self.gate)
        maybe = []
        for dev, g in enumerate(self.gate):
            v = gate_vals[g]
            if v is LogicValue.ONE:
                on[dev] = self.is_n[dev]
            elif v is LogicValue.ZERO:
                on[dev] = not self.is_n[dev]
            else:
                maybe.append(dev)

        result, fights = self._resolve(*self.drive(sources, on), prev)
        if maybe and len(maybe) <= _EXACT_MAYBE_LIMIT:
            for bits in itertools.product((False, True), repeat=len(maybe)):
                if not any(bits):
                    continue
                trial_on = list(on)
                for dev, b in zip(maybe, bits):
                    trial_on[dev] = b
                trial, _ = self._resolve(*self.drive(sources, trial_on), prev)
                for i in self.internal:
                    r, t = result[i], trial[i]
                    if r[0] is not t[0]:
                        result[i] = _X
                    elif r[1] is not t[1]:
                        result[i] = (r[0], Strength.DEGRADED, r[2] and t[2])
        elif maybe:
            # bounds: all-off gives the weakest drive, all-on the strongest
            lo1, lo0 = self.drive(sources, on)
            all_on = list(on)
            for dev in maybe:
                all_on[dev] = True
            hi1, hi0 = self.drive(sources, all_on)
            for i in self.internal:
                if lo1[i] > hi0[i]:
                    result[i] = (LogicValue.ONE, Strength(lo1[i]), False)
                elif lo0[i] > hi1[i]:
                    result[i] = (LogicValue.ZERO, Strength(lo0[i]), False)
                elif hi1[i] or hi0[i]:
                    result[i] = _X
        for i, v in sources.items():
            result[i] = (v, Strength.STRONG, False)
        return tuple(result), fights

    # -- relaxation ----------------------------------------------------------

    def relax(self, start, sources, prev, limit, frozen=None):
        """Iterate ``step``. Returns (state, fights, None) or (None, None, cycle_states)."""
        seen = {start: 0}
        history = [start]
        state = start
        for _ in range(limit):
            new, fights = self.step(state, sources, prev, frozen)
            if new == state:
                return new, fights, None
            if new in seen:
                return None, None, history[seen[new]:]
            seen[new] = len(history)
            history.append(new)
            state = new
        return None, None, history[-2:]

    def clusters(self, nodes: list[int]) -> list[list[int]]:
        """Group oscillating nodes that can influence each other."""
        ccc = {u: self.region([u], lambda _d: True) for u in nodes}
        parent = {u: u for u in nodes}

        def find(u):
            while parent[u] != u:
                parent[u] = parent[parent[u]]
                u = parent[u]
            return u

        for u in nodes:
            controlled = set()
            for w in ccc[u]:
                for dev in self.gated_by[w]:
                    d = self.n.devices[dev]
                    controlled.update((d.source, d.drain))
            for v in nodes:
                if v != u and (v in ccc[u] or controlled & ccc[v]):
                    parent[find(u)] = find(v)
        groups: dict[int, list[int]] = {}
        for u in nodes:
            groups.setdefault(find(u), []).append(u)
        return sorted((sorted(g, key=self._key) for g in groups.values()), key=lambda g: self._key(g[0]))

    def _key(self, i: int) -> str:
        return self.n.nodes[i].name.lower()

    def resolve_oscillation(self, cycle, sources, prev, limit):
        base = cycle[0]
        osc = sorted({i for i in self.internal if len({s[i][0] for s in cycle}) > 1}, key=self._key)
        frozen = {i: base[i][0] for i in osc}
        chosen = list(base)
        for group in self.clusters(osc):
            # only gate nodes steer switches; everything else follows from them
            keys = [i for i in group if self.gated_by[i]]
            if len(keys) > _CLUSTER_LIMIT:
                for i in group:
                    frozen[i] = LogicValue.X
                    chosen[i] = _X
                continue
            candidates = []
            for bits in itertools.product((LogicValue.ZERO, LogicValue.ONE), repeat=len(keys)):
                hyp = dict(frozen)
                hyp.update(zip(keys, bits))
                start = list(chosen)
                for i, v in zip(keys, bits):
                    start[i] = (v, Strength.STRONG, False)
                state, fights, _ = self.relax(tuple(start), sources, prev, limit, hyp)
                if state is None:
                    continue
                if all(state[i][0] is v for i, v in zip(keys, bits)):
                    candidates.append((fights, state))
            if not candidates:
                picks = {i: _X for i in group}
            else:
                best = min(c[0] for c in candidates)
                winners = [c[1] for c in candidates if c[0] == best]
                picks = {}
                for i in group:
                    vals = {w[i][0] for w in winners}
                    picks[i] = winners[0][i] if len(vals) == 1 else _X
            for i, s in picks.items():
                chosen[i] = s
                frozen[i] = s[0]
        return tuple(chosen)


@functools.lru_cache(maxsize=128)
def _engine(n: Netlist) -> _Engine:
    return _Engine(n)


def source_values(n: Netlist, inputs: Mapping, cfg: EvalConfig) -> dict[int, LogicValue]:
    values: dict[int, LogicValue] = {}
    given = {}
    for key, v in inputs.items():
        idx = key if isinstance(key, int) else n.node_id(key)
        given[idx] = LogicValue.of(v)
    for i, node in enumerate(n.nodes):
        if node.role is NodeRole.SUPPLY:
            values[i] = LogicValue.ONE
        elif node.role is NodeRole.GROUND:
            values[i] = LogicValue.ZERO
        elif node.role is NodeRole.POWER_CLOCK:
            values[i] = LogicValue.ONE if cfg.clock_phase.clock_high else LogicValue.ZERO
        elif node.role is NodeRole.INPUT:
            v = given.get(i)
            if v not in (LogicValue.ZERO, LogicValue.ONE):
                raise MissingInput(f"input {node.name!r} needs a 0/1 value, got {v}")
            values[i] = v
    return values


def _finish(n: Netlist, state, sources, cfg: EvalConfig, prev: Mapping[int, NodeState] | None) -> dict[int, NodeState]:
    out: dict[int, NodeState] = {}
    for i, (value, strength, retained) in enumerate(state):
        p = prev.get(i) if prev is not None else None
        if retained and p is not None:
            out[i] = NodeState(p.value, p.strength, p.level, True)
            continue
        if value in (LogicValue.X, LogicValue.Z):
            out[i] = NodeState(value, Strength.STRONG, p.level if p is not None else 0.0)
            continue
        # a degraded drive cannot pull a node off a full-rail level of the same value
        if (strength is Strength.DEGRADED and p is not None and p.value is value
                and p.level == cfg.level(value, Strength.STRONG)):
            strength = Strength.STRONG
        out[i] = NodeState(value, strength, cfg.level(value, strength))
    return out


def evaluate(
    n: Netlist,
    inputs: Mapping,
    cfg: EvalConfig = EvalConfig(),
    prev: Mapping[int, NodeState] | None = None,
) -> dict[int, NodeState]:
    """Steady-state value of every node, keyed by node index.

    ``inputs`` maps input node (name or index) to 0/1.  With ``prev``,
    undriven nodes keep their previous state (charge retention); without
    it they are Z.
    """
    eng = _engine(n)
    sources = source_values(n, inputs, cfg)
    limit = cfg.max_iterations or 4 * len(n.nodes)
    prev_t = None
    if prev is not None:
        prev_t = [(prev[i].value, prev[i].strength, False) for i in range(len(n.nodes))]
    start = list(prev_t) if prev_t is not None else [_Z] * len(n.nodes)
    for i, v in sources.items():
        start[i] = (v, Strength.STRONG, False)
    start = tuple(start)

    state, _, cycle = eng.relax(start, sources, prev_t, limit)
    if state is None:
        resolved = eng.resolve_oscillation(cycle, sources, prev_t, limit)
        state, _, cycle = eng.relax(resolved, sources, prev_t, limit)
    if state is None:
        osc = [i for i in eng.internal if len({s[i][0] for s in cycle}) > 1]
        bad = list(cycle[-1])
        for i in osc:
            bad[i] = _X
        raise NonConvergence(
            f"{n.name}: no fixed point within {limit} iterations",
            _finish(n, bad, sources, cfg, prev),
            [n.nodes[i].name for i in osc],
        )
    return _finish(n, state, sources, cfg, prev)


def reset_state(n: Netlist, cfg: EvalConfig = EvalConfig()) -> dict[int, NodeState]:
    """Every node discharged: the power-up state of a power-clocked circuit."""
    return {i: NodeState(LogicValue.ZERO, Strength.STRONG, 0.0) for i in range(len(n.nodes))}


def run_phases(n: Netlist, inputs: Mapping, cfg: EvalConfig, prev, phases=CLOCK_SEQUENCE):
    """Evaluate successive clock phases, each starting from the previous result."""
    states = []
    for phase in phases:
        prev = evaluate(n, inputs, cfg.at(phase), prev)
        states.append((phase, prev))
    return states


# --------------------------------------------------------------------------
# truth tables

def complement_pins(n: Netlist) -> dict[int, int]:
    """Map complement input pins (``<X>_b`` where ``<X>`` is an input) to their true pin."""
    names = {n.nodes[i].name.lower(): i for i in n.inputs}
    out = {}
    for i in n.inputs:
        name = n.nodes[i].name.lower()
        if name.endswith("_b") and name[:-2] in names:
            out[i] = names[name[:-2]]
    return out


def independent_inputs(n: Netlist) -> list[int]:
    comp = complement_pins(n)
    return [i for i in n.inputs if i not in comp]


def expand_inputs(n: Netlist, bits: Sequence[int]) -> dict[int, int]:
    """Assign ``bits`` to the independent inputs and derive the complement pins."""
    indep = independent_inputs(n)
    if len(bits) != len(indep):
        raise ValueError(f"{n.name} has {len(indep)} independent inputs, got {len(bits)} bits")
    values = dict(zip(indep, bits))
    for comp, true in complement_pins(n).items():
        values[comp] = 1 - values[true]
    return values


@dataclass(frozen=True)
class TruthRow:
    inputs: tuple[int, ...]
    outputs: tuple[NodeState, ...]


@dataclass
class TruthTable:
    input_names: list[str]
    output_names: list[str]
    rows: list[TruthRow] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = [",".join(self.input_names + self.output_names)]
        for row in self.rows:
            lines.append(",".join([str(b) for b in row.inputs] + [str(s) for s in row.outputs]))
        return "\n".join(lines) + "\n"


def evaluate_row(n: Netlist, bits: Sequence[int], cfg: EvalConfig, prev=None):
    """Evaluate one input combination. Returns (output-phase state, final state).

    Power-clocked circuits run a full WAIT, EVALUATE, HOLD, RECOVER period and
    report outputs from HOLD; a cold start begins from the discharged state.
    """
    inputs = expand_inputs(n, bits)
    if not n.is_power_clocked:
        s = evaluate(n, inputs, cfg, prev)
        return s, s
    if prev is None:
        prev = reset_state(n, cfg)
    states = dict(run_phases(n, inputs, cfg, prev))
    return states[Phase.HOLD], states[Phase.RECOVER]


def truth_table(n: Netlist, cfg: EvalConfig = EvalConfig(), *, warm: bool = False) -> TruthTable:
    """One row per combination of the independent inputs, in ascending binary order.

    Cold rows start from scratch.  Warm rows chain state from row to row,
    beginning from the state left by the last row.
    """
    indep = independent_inputs(n)
    k = len(indep)
    if k > 16:
        raise ValueError("truth tables are limited to 16 inputs")
    table = TruthTable([n.nodes[i].name for i in indep], n.output_names)
    combos = list(itertools.product((0, 1), repeat=k))
    prev = None
    if warm and combos:
        prev = _annotated(n, combos[-1], cfg, None)[1]
    for bits in combos:
        out_state, final = _annotated(n, bits, cfg, prev)
        if warm:
            prev = final
        table.rows.append(TruthRow(bits, tuple(out_state[i] for i in n.outputs)))
    return table


def _annotated(n, bits, cfg, prev):
    try:
        return evaluate_row(n, bits, cfg, prev)
    except EvalError as e:
        e.row = tuple(bits)
        raise


def states_by_name(n: Netlist, states: Mapping[int, NodeState]) -> dict[str, NodeState]:
    return {n.nodes[i].name: s for i, s in states.items()}
