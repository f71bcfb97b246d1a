"""Lowering to device gate sets, SWAP routing and circuit metrics."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .circuit import Circuit, Gate
from .errors import LayoutError, SizeError, UnboundParameterError, UnsupportedGateError
from .simulator import StateVector, simulate

if TYPE_CHECKING:
    from .devices import DeviceProfile

ONE_QUBIT = frozenset({"X", "H", "SX", "RX", "RZ"})
TWO_QUBIT = frozenset({"CX", "SWAP", "RZZ"})
ENTANGLERS = ("CX", "RZZ")


@dataclass(frozen=True)
class NativeGateSet:
    kinds: frozenset[str]
    entangler: str

    def __post_init__(self):
        object.__setattr__(self, "kinds", frozenset(self.kinds))
        if self.entangler not in ENTANGLERS:
            raise ValueError(f"entangler must be one of {ENTANGLERS}, got {self.entangler!r}")
        if self.entangler not in self.kinds:
            raise ValueError("the entangler must be a native gate")
        if not self.kinds & {"RX", "RZ"}:
            raise ValueError("a native gate set needs a one-qubit rotation family")


@dataclass(frozen=True)
class CouplingMap:
    """Undirected physical connectivity; ``all_to_all`` allows every pair."""

    qubit_count: int
    edges: tuple[tuple[int, int], ...] = ()
    all_to_all: bool = False

    def __post_init__(self):
        edges = tuple(sorted({(min(a, b), max(a, b)) for a, b in self.edges}))
        for a, b in edges:
            if a == b or not (0 <= a < b < self.qubit_count):
                raise ValueError(f"invalid coupling edge ({a}, {b})")
        object.__setattr__(self, "edges", edges)

    @cached_property
    def _neighbors(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.qubit_count)]
        for a, b in self.edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        return [sorted(n) for n in nbrs]

    def neighbors(self, q: int) -> list[int]:
        if self.all_to_all:
            return [p for p in range(self.qubit_count) if p != q]
        return self._neighbors[q]

    def connected(self, a: int, b: int) -> bool:
        return self.all_to_all or b in self._neighbors[a]

    def with_edge(self, a: int, b: int) -> "CouplingMap":
        return CouplingMap(self.qubit_count, self.edges + ((a, b),), self.all_to_all)

    def bfs_order(self, start: int = 0) -> list[int]:
        seen = {start}
        order = [start]
        queue = deque([start])
        while queue:
            q = queue.popleft()
            for p in self.neighbors(q):
                if p not in seen:
                    seen.add(p)
                    order.append(p)
                    queue.append(p)
        return order

    def shortest_path(self, src: int, dst: int) -> list[int]:
        """BFS path, preferring the lowest physical index at every step."""
        if src == dst:
            return [src]
        parent = {src: src}
        queue = deque([src])
        while queue:
            q = queue.popleft()
            for p in self.neighbors(q):
                if p not in parent:
                    parent[p] = q
                    if p == dst:
                        path = [dst]
                        while path[-1] != src:
                            path.append(parent[path[-1]])
                        return path[::-1]
                    queue.append(p)
        raise LayoutError(f"physical qubits {src} and {dst} are not connected")


# -- decomposition ---------------------------------------------------------------

_PI = math.pi
_MAX_LOWERING_DEPTH = 6


def _ccx_rule(a: int, b: int, t: int) -> list[Gate]:
    tdg = -_PI / 4
    tt = _PI / 4
    return [
        Gate("H", (t,)),
        Gate("CX", (b, t)),
        Gate("RZ", (t,), tdg),
        Gate("CX", (a, t)),
        Gate("RZ", (t,), tt),
        Gate("CX", (b, t)),
        Gate("RZ", (t,), tdg),
        Gate("CX", (a, t)),
        Gate("RZ", (b,), tt),
        Gate("RZ", (t,), tt),
        Gate("H", (t,)),
        Gate("CX", (a, b)),
        Gate("RZ", (a,), tt),
        Gate("RZ", (b,), tdg),
        Gate("CX", (a, b)),
    ]


def _rule(g: Gate, gs: NativeGateSet) -> list[Gate] | None:
    k, q = g.kind, g.qubits
    native = gs.kinds
    if k == "CCX":
        return _ccx_rule(*q)
    if k == "SWAP":
        a, b = q
        return [Gate("CX", (a, b)), Gate("CX", (b, a)), Gate("CX", (a, b))]
    if k == "RZZ":
        a, b = q
        return [Gate("CX", (a, b)), Gate("RZ", (b,), g.angle), Gate("CX", (a, b))]
    if k == "CX" and gs.entangler == "RZZ":
        c, t = q
        return [
            Gate("H", (t,)),
            Gate("RZ", (c,), _PI / 2),
            Gate("RZ", (t,), _PI / 2),
            Gate("RZZ", (c, t), -_PI / 2),
            Gate("H", (t,)),
        ]
    if k == "H":
        if "SX" in native:
            return [Gate("RZ", q, _PI / 2), Gate("SX", q), Gate("RZ", q, _PI / 2)]
        if "RX" in native:
            return [Gate("RZ", q, _PI / 2), Gate("RX", q, _PI / 2), Gate("RZ", q, _PI / 2)]
        return None
    if k == "X":
        if "RX" in native:
            return [Gate("RX", q, _PI)]
        if "SX" in native:
            return [Gate("SX", q), Gate("SX", q)]
        return None
    if k == "SX":
        if "RX" in native:
            return [Gate("RX", q, _PI / 2)]
        return [Gate("H", q), Gate("RZ", q, _PI / 2), Gate("H", q)]
    if k == "RX" and "RZ" in native:
        return [Gate("H", q), Gate("RZ", q, g.angle), Gate("H", q)]
    if k == "RZ" and "RX" in native:
        return [Gate("H", q), Gate("RX", q, g.angle), Gate("H", q)]
    return None


def _lower(g: Gate, gs: NativeGateSet, depth: int = 0) -> list[Gate]:
    if g.kind in gs.kinds:
        return [g]
    replacement = _rule(g, gs) if depth < _MAX_LOWERING_DEPTH else None
    if replacement is None:
        raise UnsupportedGateError(f"cannot lower {g.kind} into {sorted(gs.kinds)}")
    out: list[Gate] = []
    for sub in replacement:
        out += _lower(sub, gs, depth + 1)
    return out


def decompose(c: Circuit, gs: NativeGateSet) -> Circuit:
    """Rewrite every gate into ``gs`` (equal up to global phase)."""
    if not c.is_executable:
        raise UnboundParameterError("decompose needs a bound circuit")
    if all(g.kind in gs.kinds for g in c.gates):
        return c
    out: list[Gate] = []
    for g in c.gates:
        out += _lower(g, gs)
    return c.with_gates(out)


def merge_rotations(c: Circuit, tol: float = 1e-12) -> Circuit:
    """Fuse back-to-back rotations of the same kind on the same qubits and
    drop rotations whose angle vanishes."""
    out: list[Gate | None] = []
    last: dict[int, int] = {}
    for g in c.gates:
        prev_idx = {last.get(q) for q in g.qubits}
        if g.kind in ("RZ", "RX", "RZZ") and len(prev_idx) == 1:
            (i,) = prev_idx
            prev = out[i] if i is not None else None
            if prev is not None and prev.kind == g.kind and set(prev.qubits) == set(g.qubits):
                out[i] = Gate(g.kind, prev.qubits, prev.angle + g.angle)
                continue
        out.append(g)
        for q in g.qubits:
            last[q] = len(out) - 1
    kept = [g for g in out if g is not None and not (g.angle is not None and abs(g.angle) < tol)]
    return c.with_gates(kept)


# -- routing -------------------------------------------------------------------------


@dataclass(frozen=True)
class Layout:
    """Logical-to-physical placement before and after routing.

    ``permutation[p]`` is the physical position whose initial content sits
    at ``p`` after the routed circuit runs (SWAPs only permute contents).
    """

    initial: tuple[int, ...]
    final: tuple[int, ...]
    permutation: tuple[int, ...]

    def logical_bitstring(self, physical_bits: str) -> str:
        return "".join(physical_bits[p] for p in self.final)


def initial_layout(logical: int, cm: CouplingMap) -> tuple[int, ...]:
    if logical > cm.qubit_count:
        raise LayoutError(f"circuit needs {logical} qubits, device has {cm.qubit_count}")
    if cm.all_to_all:
        return tuple(range(logical))
    order = cm.bfs_order(0)
    if len(order) < logical:
        raise LayoutError("connected component of qubit 0 is too small")
    return tuple(order[:logical])


def route(c: Circuit, cm: CouplingMap) -> tuple[Circuit, Layout, int]:
    """Insert SWAPs so every two-qubit gate acts on a coupled pair.

    For an uncoupled gate the operand with the lower logical index walks
    along the shortest path towards the other until they are adjacent.
    Returns the physical circuit, its layout and the number of SWAPs added.
    """
    n = c.qubit_count
    init = initial_layout(n, cm)
    l2p = list(init)
    content = list(range(cm.qubit_count))  # content[p] = original position now at p
    p2l: dict[int, int] = {p: l for l, p in enumerate(l2p)}
    gates: list[Gate] = []
    swaps = 0

    def do_swap(p: int, r: int):
        nonlocal swaps
        gates.append(Gate("SWAP", (p, r)))
        swaps += 1
        content[p], content[r] = content[r], content[p]
        lp, lr = p2l.pop(p, None), p2l.pop(r, None)
        if lp is not None:
            p2l[r] = lp
            l2p[lp] = r
        if lr is not None:
            p2l[p] = lr
            l2p[lr] = p

    for g in c.gates:
        if len(g.qubits) == 1:
            gates.append(Gate(g.kind, (l2p[g.qubits[0]],), g.angle, g.param))
            continue
        if len(g.qubits) > 2:
            if not cm.all_to_all:
                raise UnsupportedGateError(f"decompose {g.kind} before routing")
            gates.append(Gate(g.kind, tuple(l2p[q] for q in g.qubits), g.angle, g.param))
            continue
        a, b = g.qubits
        if not cm.connected(l2p[a], l2p[b]):
            mover, other = (a, b) if a < b else (b, a)
            path = cm.shortest_path(l2p[mover], l2p[other])
            for step in path[1:-1]:
                do_swap(l2p[mover], step)
        gates.append(Gate(g.kind, (l2p[a], l2p[b]), g.angle, g.param))

    routed = Circuit(cm.qubit_count, tuple(gates), c.parameters, name=c.name)
    return routed, Layout(init, tuple(l2p), tuple(content)), swaps


def coupling_violations(c: Circuit, cm: CouplingMap) -> list[Gate]:
    return [g for g in c.gates if len(g.qubits) == 2 and not cm.connected(*g.qubits)]


def layout_corrected(routed: Circuit, layout: Layout, logical: int) -> Circuit:
    """Compact a routed circuit onto the physical qubits it touches and undo
    its SWAP permutation, so logical qubit ``i`` is compact qubit ``i`` at
    both ends.  Extra compact qubits are idle ancillas."""
    used = set(layout.initial)
    for g in routed.gates:
        used.update(g.qubits)
    moved = [p for p, src in enumerate(layout.permutation) if src != p]
    used.update(moved)
    order = list(layout.initial) + sorted(used - set(layout.initial))
    compact = {p: i for i, p in enumerate(order)}

    gates = [Gate(g.kind, tuple(compact[q] for q in g.qubits), g.angle, g.param) for g in routed.gates]
    content = list(layout.permutation)
    for target in range(len(content)):
        if content[target] == target:
            continue
        src = content.index(target)
        gates.append(Gate("SWAP", (compact[src], compact[target])))
        content[src], content[target] = content[target], content[src]
    width = max(len(order), logical)
    return Circuit(width, tuple(gates), routed.parameters, name=routed.name)


def widen(c: Circuit, qubit_count: int) -> Circuit:
    return Circuit(qubit_count, c.gates, c.parameters, c.registers, c.name)


def verify_equivalence(a: Circuit, b: Circuit, max_qubits: int = 6) -> float:
    """Minimum over computational-basis inputs of ``|<a psi|b psi>|^2``."""
    n = max(a.qubit_count, b.qubit_count)
    if n > max_qubits:
        raise SizeError(f"equivalence check is capped at {max_qubits} qubits, got {n}")
    a, b = widen(a, n), widen(b, n)
    worst = 1.0
    for k in range(2**n):
        start = StateVector.basis(k, n)
        ua = simulate(a, start).amplitudes
        ub = simulate(b, start).amplitudes
        worst = min(worst, float(abs(np.vdot(ua, ub)) ** 2))
    return worst


def circuit_unitary(c: Circuit) -> np.ndarray:
    n = c.qubit_count
    cols = [simulate(c, StateVector.basis(k, n)).amplitudes for k in range(2**n)]
    return np.column_stack(cols)


def process_fidelity(a: Circuit, b: Circuit) -> float:
    """``|Tr(U_a^dagger U_b)|^2 / d^2``; insensitive to global phase only."""
    n = max(a.qubit_count, b.qubit_count)
    ua, ub = circuit_unitary(widen(a, n)), circuit_unitary(widen(b, n))
    d = 2**n
    return float(abs(np.trace(ua.conj().T @ ub)) ** 2 / d**2)


# -- metrics -----------------------------------------------------------------------------


@dataclass(frozen=True)
class TranspileMetrics:
    depth: int
    count_1q: int
    count_2q: int
    swap_count: int
    estimated_duration: float

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "count_1q": self.count_1q,
            "count_2q": self.count_2q,
            "swap_count": self.swap_count,
            "estimated_duration": self.estimated_duration,
        }


def _gate_duration(g: Gate, device: "DeviceProfile") -> float:
    if len(g.qubits) == 1:
        return 0.0 if (g.kind == "RZ" and device.virtual_rz) else device.duration_1q
    if g.kind == "SWAP":
        return 3 * device.duration_2q
    return device.duration_2q


def metrics(c: Circuit, device: "DeviceProfile", swap_count: int = 0) -> TranspileMetrics:
    """Depth, physical gate counts and ASAP-layered duration.

    Virtual RZ gates (when the device declares them) cost no time and are
    not counted as physical one-qubit gates.
    """
    level: dict[int, int] = {}
    layer_time: dict[int, float] = {}
    n1 = n2 = 0
    for g in c.gates:
        if len(g.qubits) == 1:
            if not (g.kind == "RZ" and device.virtual_rz):
                n1 += 1
        elif g.kind == "SWAP":
            n2 += 3
        else:
            n2 += len(g.qubits) - 1 if len(g.qubits) > 2 else 1
        d = max(level.get(q, 0) for q in g.qubits) + 1
        for q in g.qubits:
            level[q] = d
        layer_time[d] = max(layer_time.get(d, 0.0), _gate_duration(g, device))
    depth = max(level.values(), default=0)
    return TranspileMetrics(depth, n1, n2, swap_count, float(sum(layer_time.values())))


@dataclass(frozen=True)
class TranspileResult:
    circuit: Circuit
    layout: Layout
    metrics: TranspileMetrics


def transpile(c: Circuit, device: "DeviceProfile") -> TranspileResult:
    """decompose -> route -> lower inserted SWAPs -> fuse rotations -> metrics."""
    if c.qubit_count > device.qubit_count:
        raise LayoutError(f"{device.name} has {device.qubit_count} qubits, circuit needs {c.qubit_count}")
    lowered = decompose(c, device.native)
    routed, layout, swaps = route(lowered, device.coupling)
    final = merge_rotations(decompose(routed, device.native))
    return TranspileResult(final, layout, metrics(final, device, swaps))
