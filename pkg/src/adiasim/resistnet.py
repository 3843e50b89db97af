"""Effective resistance of the conducting switch network between two nodes.

The on devices of a settled circuit form a resistor network.  Its
effective resistance between a rail and a charging node is the ``R`` used
by the adiabatic loss formula.  We solve the grounded nodal system
directly, which is exact and cheap for networks of this size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .netlist import Netlist
from .switch_eval import NodeState, switch_is_on

__all__ = [
    "ConductanceNetwork",
    "SingularSystem",
    "from_on_switches",
    "effective_resistance",
]

_PIVOT_GUARD = 1e-15


class SingularSystem(ArithmeticError):
    """The grounded Laplacian could not be solved (only if invariants were bypassed)."""


@dataclass(frozen=True)
class ConductanceNetwork:
    node_count: int
    edges: tuple[tuple[int, int, float], ...]
    terminal_a: int
    terminal_b: int

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(a), int(b), float(g)) for a, b, g in self.edges))
        if self.terminal_a == self.terminal_b:
            raise ValueError("terminals must differ")
        for t in (self.terminal_a, self.terminal_b):
            if not 0 <= t < self.node_count:
                raise ValueError(f"terminal {t} outside 0..{self.node_count - 1}")
        for a, b, g in self.edges:
            if not (0 <= a < self.node_count and 0 <= b < self.node_count):
                raise ValueError(f"edge ({a}, {b}) references a missing node")
            if not (g > 0 and math.isfinite(g)):
                raise ValueError(f"conductance must be positive and finite, got {g}")

    @classmethod
    def from_resistors(cls, node_count: int, resistors, terminal_a: int, terminal_b: int) -> "ConductanceNetwork":
        """Convenience constructor taking (a, b, ohms) triples."""
        return cls(node_count, tuple((a, b, 1.0 / r) for a, b, r in resistors), terminal_a, terminal_b)

    def with_edge(self, a: int, b: int, conductance: float) -> "ConductanceNetwork":
        return ConductanceNetwork(self.node_count, self.edges + ((a, b, conductance),), self.terminal_a, self.terminal_b)

    def swapped(self) -> "ConductanceNetwork":
        return ConductanceNetwork(self.node_count, self.edges, self.terminal_b, self.terminal_a)


def from_on_switches(n: Netlist, states: Mapping[int, NodeState], rail: int, target: int) -> ConductanceNetwork:
    """Network of devices that are definitely on; undecided switches are left out."""
    edges = []
    for d in n.devices:
        if d.source == d.drain:
            continue
        if switch_is_on(d.kind, states[d.gate]) is True:
            edges.append((d.source, d.drain, 1.0 / d.on_resistance))
    return ConductanceNetwork(len(n.nodes), tuple(edges), rail, target)


def _component(g: ConductanceNetwork) -> list[int]:
    adj: dict[int, set[int]] = {}
    for a, b, _ in g.edges:
        if a != b:
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
    seen = {g.terminal_a}
    stack = [g.terminal_a]
    while stack:
        u = stack.pop()
        for v in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return sorted(seen)


def effective_resistance(g: ConductanceNetwork) -> float:
    """Voltage across the terminals when 1 A flows from ``terminal_a`` to ``terminal_b``.

    Returns ``math.inf`` when no conducting path joins the terminals.
    """
    nodes = _component(g)
    if g.terminal_b not in nodes:
        return math.inf
    # ground terminal_b; unknowns are the other nodes of the connected piece
    unknown = [u for u in nodes if u != g.terminal_b]
    index = {u: k for k, u in enumerate(unknown)}
    lap = np.zeros((len(unknown), len(unknown)))
    gmax = 0.0
    for a, b, cond in g.edges:
        if a == b or a not in index and a != g.terminal_b:
            continue
        gmax = max(gmax, cond)
        ia, ib = index.get(a), index.get(b)
        if ia is not None:
            lap[ia, ia] += cond
        if ib is not None:
            lap[ib, ib] += cond
        if ia is not None and ib is not None:
            lap[ia, ib] -= cond
            lap[ib, ia] -= cond
    rhs = np.zeros(len(unknown))
    rhs[index[g.terminal_a]] = 1.0
    v = _solve(lap, rhs, _PIVOT_GUARD * gmax)
    return float(v[index[g.terminal_a]])


def _solve(a: np.ndarray, b: np.ndarray, guard: float) -> np.ndarray:
    # Gaussian elimination with partial pivoting; numpy's LAPACK path would
    # hide near-singular pivots, which we want to report.
    a = a.copy()
    b = b.copy()
    size = len(b)
    for k in range(size):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) <= guard:
            raise SingularSystem(f"pivot {a[p, k]:.3g} below guard at column {k}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        factors = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(factors, a[k, k:])
        b[k + 1:] -= factors * b[k]
    x = np.zeros(size)
    for k in range(size - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x
