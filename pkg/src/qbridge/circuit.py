"""Circuit intermediate representation, Ising conversion and QAOA builder.

Qubit 0 is the least-significant bit of a basis-state index throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import QBridgeError, UnboundParameterError
from .qubo import Qubo

ARITY = {
    "X": 1,
    "H": 1,
    "SX": 1,
    "RX": 1,
    "RZ": 1,
    "CX": 2,
    "SWAP": 2,
    "RZZ": 2,
    "CCX": 3,
}
ROTATIONS = frozenset({"RX", "RZ", "RZZ"})


@dataclass(frozen=True)
class Gate:
    """One instruction.

    Rotations carry ``angle`` in radians.  A parametric rotation instead
    names a slot in ``param`` and its angle is ``angle * value(param)``.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    param: str | None = None

    def __post_init__(self):
        if self.kind not in ARITY:
            raise QBridgeError(f"unknown gate kind {self.kind!r}")
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if len(qubits) != ARITY[self.kind]:
            raise QBridgeError(f"{self.kind} acts on {ARITY[self.kind]} qubits, got {len(qubits)}")
        if len(set(qubits)) != len(qubits) or min(qubits) < 0:
            raise QBridgeError(f"invalid qubit operands {qubits} for {self.kind}")
        if self.kind in ROTATIONS:
            if self.angle is None:
                raise QBridgeError(f"{self.kind} needs an angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None or self.param is not None:
            raise QBridgeError(f"{self.kind} takes no angle")

    @property
    def is_bound(self) -> bool:
        return self.param is None

    def inverse(self) -> "Gate":
        if self.kind in ROTATIONS:
            return replace(self, angle=-self.angle)
        if self.kind == "SX":
            # equal to SX^-1 up to global phase
            return Gate("RX", self.qubits, -math.pi / 2)
        return self

    def __str__(self) -> str:
        ops = " ".join(str(q) for q in self.qubits)
        if self.kind not in ROTATIONS:
            return f"{self.kind} {ops}"
        if self.param is not None:
            return f"{self.kind} {ops} {self.angle!r}*{self.param}"
        return f"{self.kind} {ops} {self.angle!r}"


@dataclass(frozen=True)
class Register:
    name: str
    start: int
    size: int
    role: str

    @property
    def qubits(self) -> range:
        return range(self.start, self.start + self.size)


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    gates: tuple[Gate, ...] = ()
    parameters: tuple[str, ...] = ()
    registers: tuple[Register, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "parameters", tuple(self.parameters))
        object.__setattr__(self, "registers", tuple(self.registers))
        for g in self.gates:
            if max(g.qubits) >= self.qubit_count:
                raise QBridgeError(f"gate {g} exceeds qubit_count {self.qubit_count}")
            if g.param is not None and g.param not in self.parameters:
                raise QBridgeError(f"gate {g} uses undeclared parameter {g.param!r}")

    @property
    def is_executable(self) -> bool:
        return not self.parameters

    def register(self, name: str) -> Register:
        for r in self.registers:
            if r.name == name:
                return r
        raise KeyError(name)

    def gate_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for g in self.gates:
            counts[g.kind] = counts.get(g.kind, 0) + 1
        return dict(sorted(counts.items()))

    def depth(self) -> int:
        level = [0] * self.qubit_count
        for g in self.gates:
            d = max(level[q] for q in g.qubits) + 1
            for q in g.qubits:
                level[q] = d
        return max(level, default=0)

    def with_gates(self, gates: Iterable[Gate], qubit_count: int | None = None) -> "Circuit":
        return replace(self, gates=tuple(gates), qubit_count=qubit_count or self.qubit_count)

    def inverse(self) -> "Circuit":
        if not self.is_executable:
            raise UnboundParameterError("cannot invert a parametric circuit")
        return self.with_gates(g.inverse() for g in reversed(self.gates))

    def compose(self, other: "Circuit") -> "Circuit":
        if other.qubit_count > self.qubit_count:
            raise QBridgeError("cannot append a wider circuit")
        params = self.parameters + tuple(p for p in other.parameters if p not in self.parameters)
        return replace(self, gates=self.gates + other.gates, parameters=params)

    def dump(self) -> str:
        """Line-oriented text form, one gate per line."""
        return "".join(f"{g}\n" for g in self.gates)


def load_circuit(text: str, qubit_count: int | None = None) -> Circuit:
    """Parse the output of :meth:`Circuit.dump` (bound or parametric)."""
    gates, params = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        kind = parts[0]
        arity = ARITY[kind]
        qubits = tuple(int(p) for p in parts[1:1 + arity])
        angle = param = None
        if kind in ROTATIONS:
            token = parts[1 + arity]
            if "*" in token:
                coeff, param = token.split("*", 1)
                angle = float(coeff)
                if param not in params:
                    params.append(param)
            else:
                angle = float(token)
        gates.append(Gate(kind, qubits, angle, param))
    if qubit_count is None:
        qubit_count = max((max(g.qubits) for g in gates), default=-1) + 1
    return Circuit(qubit_count, tuple(gates), tuple(params))


def bind(c: Circuit, values: Mapping[str, float]) -> Circuit:
    """Substitute parameter values; returns an executable circuit."""
    missing = [p for p in c.parameters if p not in values]
    if missing:
        raise UnboundParameterError(f"no value for parameter(s) {missing}")
    gates = tuple(
        g if g.param is None else Gate(g.kind, g.qubits, g.angle * float(values[g.param]))
        for g in c.gates
    )
    return replace(c, gates=gates, parameters=())


# -- Ising form ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IsingForm:
    """``E(z) = sum h_i z_i + sum_{i<j} J_ij z_i z_j + constant`` for ``z_i = ±1``."""

    h: np.ndarray
    j: np.ndarray
    constant: float

    @property
    def size(self) -> int:
        return self.h.shape[0]

    def energy(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return float(self.h @ z + z @ np.triu(self.j, 1) @ z + self.constant)

    def couplings(self) -> list[tuple[int, int, float]]:
        n = self.size
        return [(a, b, float(self.j[a, b])) for a in range(n) for b in range(a + 1, n) if self.j[a, b] != 0]


def ising_from_qubo(q: Qubo) -> IsingForm:
    """Change of variables ``x = (1 - z) / 2``."""
    m = q.q
    n = q.dim
    h = np.zeros(n)
    j = np.zeros((n, n))
    constant = q.offset
    for a in range(n):
        h[a] -= m[a, a] / 2
        constant += m[a, a] / 2
        for b in range(a + 1, n):
            c = m[a, b]  # the pair contributes 2c x_a x_b
            if c == 0:
                continue
            j[a, b] = j[b, a] = c / 2
            h[a] -= c / 2
            h[b] -= c / 2
            constant += c / 2
    return IsingForm(h, j, constant)


# -- QAOA ------------------------------------------------------------------------


def qaoa_parameter_names(layers: int) -> tuple[str, ...]:
    return tuple(f"gamma_{l}" for l in range(1, layers + 1)) + tuple(f"beta_{l}" for l in range(1, layers + 1))


def qaoa_circuit(q: Qubo, layers: int = 1) -> Circuit:
    """Parametric QAOA ansatz for the Ising form of ``q``.

    Layer ``l`` applies ``RZ(2 gamma_l h_i)``, ``RZZ(2 gamma_l J_ik)`` and
    ``RX(2 beta_l)``; the initial layer is a Hadamard on every qubit.
    """
    if layers < 1:
        raise QBridgeError(f"layers must be >= 1, got {layers}")
    if q.dim < 1:
        raise QBridgeError("QAOA needs at least one variable")
    ising = ising_from_qubo(q)
    n = q.dim
    gates = [Gate("H", (i,)) for i in range(n)]
    for l in range(1, layers + 1):
        gamma, beta = f"gamma_{l}", f"beta_{l}"
        for i in range(n):
            if ising.h[i] != 0:
                gates.append(Gate("RZ", (i,), 2 * ising.h[i], gamma))
        for a, b, coupling in ising.couplings():
            gates.append(Gate("RZZ", (a, b), 2 * coupling, gamma))
        for i in range(n):
            gates.append(Gate("RX", (i,), 2.0, beta))
    return Circuit(
        n,
        tuple(gates),
        qaoa_parameter_names(layers),
        (Register("qaoa", 0, n, "qaoa"),),
        name="qaoa",
    )


def qaoa_values(gammas: Sequence[float], betas: Sequence[float]) -> dict[str, float]:
    values = {f"gamma_{l}": float(g) for l, g in enumerate(gammas, start=1)}
    values.update({f"beta_{l}": float(b) for l, b in enumerate(betas, start=1)})
    return values


def prepare_basis(c: Circuit, bits: Mapping[int, int]) -> Circuit:
    """Prefix ``c`` with X gates so it starts from the given basis state."""
    prefix = tuple(Gate("X", (q,)) for q, b in sorted(bits.items()) if b)
    return replace(c, gates=prefix + c.gates)
