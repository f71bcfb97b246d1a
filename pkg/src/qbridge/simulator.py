"""Exact statevector simulation, shot sampling and QAOA parameter search.

Basis index ``k`` encodes qubit ``i`` as bit ``i`` of ``k`` (qubit 0 is the
least-significant bit).  Bitstrings in histograms are written with
character ``i`` holding qubit ``i``, so ``"1010"`` reads ``x = (1, 0, 1, 0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .circuit import Circuit, Gate, bind, qaoa_circuit, qaoa_values
from .errors import DimensionError, QBridgeError, SizeError, UnboundParameterError
from .qubo import Qubo, basis_values

MAX_SIM_QUBITS = 22

_S2 = 1 / math.sqrt(2)
_FIXED = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "SX": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex),
    "CX": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}
_CCX = np.eye(8, dtype=complex)
_CCX[[6, 7]] = _CCX[[7, 6]]
_FIXED["CCX"] = _CCX


def gate_matrix(gate: Gate) -> np.ndarray:
    """Textbook matrix of ``gate``; ``gate.qubits[0]`` is the most significant
    bit of the matrix index (so CX is ``|control, target>``-ordered)."""
    if gate.param is not None:
        raise UnboundParameterError(f"gate {gate} is not bound")
    if gate.kind in _FIXED:
        return _FIXED[gate.kind]
    t = gate.angle
    c, s = math.cos(t / 2), math.sin(t / 2)
    if gate.kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if gate.kind == "RZ":
        return np.array([[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]], dtype=complex)
    if gate.kind == "RZZ":
        a, b = np.exp(-0.5j * t), np.exp(0.5j * t)
        return np.diag([a, b, b, a])
    raise QBridgeError(f"no matrix for {gate.kind}")


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    @property
    def qubit_count(self) -> int:
        return int(self.amplitudes.shape[0]).bit_length() - 1

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.probabilities()))

    @classmethod
    def basis(cls, index: int, qubit_count: int) -> "StateVector":
        amps = np.zeros(2**qubit_count, dtype=complex)
        amps[index] = 1.0
        return cls(amps)


def apply_gate(amplitudes: np.ndarray, gate: Gate, qubit_count: int) -> np.ndarray:
    k = len(gate.qubits)
    u = gate_matrix(gate).reshape((2,) * (2 * k))
    psi = amplitudes.reshape((2,) * qubit_count)
    axes = [qubit_count - 1 - q for q in gate.qubits]
    out = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(-1)


def simulate(
    c: Circuit,
    initial: StateVector | None = None,
    observer: Callable[[int, Gate, np.ndarray], None] | None = None,
) -> StateVector:
    """Apply the gates of ``c`` in order, starting from ``|0...0>`` by default.

    ``observer(i, gate, amplitudes)`` is called after every gate.
    """
    if not c.is_executable:
        raise UnboundParameterError(f"circuit has free parameters {list(c.parameters)}")
    n = c.qubit_count
    if n > MAX_SIM_QUBITS:
        raise SizeError(f"statevector simulation is capped at {MAX_SIM_QUBITS} qubits, got {n}")
    if initial is None:
        amps = np.zeros(2**n, dtype=complex)
        amps[0] = 1.0
    else:
        if initial.amplitudes.shape[0] != 2**n:
            raise DimensionError("initial state does not match the circuit width")
        amps = initial.amplitudes.astype(complex, copy=True)
    for i, gate in enumerate(c.gates):
        amps = apply_gate(amps, gate, n)
        if observer is not None:
            observer(i, gate, amps)
    return StateVector(amps)


# -- sampling ----------------------------------------------------------------


@dataclass(frozen=True)
class Histogram:
    counts: dict[str, int]
    shots: int
    seed: int

    def most_common(self, limit: int | None = None) -> list[tuple[str, int]]:
        ranked = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return ranked if limit is None else ranked[:limit]

    def to_dict(self) -> dict:
        return {"counts": dict(sorted(self.counts.items())), "shots": self.shots, "seed": self.seed}


def index_to_bitstring(index: int, qubit_count: int) -> str:
    return "".join("1" if (index >> i) & 1 else "0" for i in range(qubit_count))


def bitstring_to_index(bits: str) -> int:
    return sum(1 << i for i, ch in enumerate(bits) if ch == "1")


def sample(s: StateVector, shots: int, seed: int) -> Histogram:
    """Multinomial draw from ``|amp|^2`` using a counter-based (Philox) stream."""
    if shots < 1:
        raise QBridgeError(f"shots must be >= 1, got {shots}")
    probs = s.probabilities()
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.Philox(seed))
    drawn = rng.multinomial(shots, probs)
    n = s.qubit_count
    counts = {index_to_bitstring(int(i), n): int(drawn[i]) for i in np.flatnonzero(drawn)}
    return Histogram(counts, shots, seed)


def expectation_qubo(s: StateVector, q: Qubo, values: np.ndarray | None = None) -> float:
    """Exact ``sum_x |amp_x|^2 value(x)``; ``values`` may be precomputed."""
    if s.amplitudes.shape[0] != 2**q.dim:
        raise DimensionError(f"state has {s.qubit_count} qubits, QUBO has {q.dim} variables")
    if values is None:
        values = basis_values(q)
    return float(s.probabilities() @ values)


# -- QAOA parameter search -----------------------------------------------------

GRID_POINTS = 8


@dataclass
class OptimizationResult:
    best_params: tuple[tuple[float, ...], tuple[float, ...]]
    best_expectation: float
    evaluations: int
    trace: list[tuple[tuple[float, ...], float]] = field(default_factory=list)

    def best_so_far(self) -> list[float]:
        out, best = [], math.inf
        for _, v in self.trace:
            best = min(best, v)
            out.append(best)
        return out


class _BudgetExhausted(Exception):
    pass


def _grid_candidates(layers: int, seed: int) -> list[np.ndarray]:
    gammas = np.arange(GRID_POINTS) * (math.pi / GRID_POINTS)
    betas = np.arange(GRID_POINTS) * (math.pi / 2 / GRID_POINTS)
    if layers == 1:
        return [np.array([g, b]) for g in gammas for b in betas]
    # deeper circuits: seeded sample of the per-layer grid product, origin first
    rng = np.random.Generator(np.random.Philox(seed))
    out = [np.zeros(2 * layers)]
    for _ in range(GRID_POINTS * GRID_POINTS - 1):
        gi = rng.integers(0, GRID_POINTS, size=layers)
        bi = rng.integers(0, GRID_POINTS, size=layers)
        out.append(np.concatenate([gammas[gi], betas[bi]]))
    return out


def optimize_qaoa(q: Qubo, layers: int = 1, budget: int = 200, seed: int = 7) -> OptimizationResult:
    """Coarse grid over ``(gamma, beta)`` followed by Nelder-Mead refinement.

    The grid spans ``[0, pi) x [0, pi/2)`` with 8x8 points per layer.
    Refinement starts at the best grid point and stops when the budget is
    used up or the simplex stalls (relative change below 1e-6).  Ties keep
    the earliest evaluation.
    """
    if layers < 1 or budget < 1:
        raise QBridgeError("layers and budget must be >= 1")
    ansatz = qaoa_circuit(q, layers)
    values = basis_values(q)
    trace: list[tuple[tuple[float, ...], float]] = []

    def objective(x: np.ndarray) -> float:
        if len(trace) >= budget:
            raise _BudgetExhausted
        params = tuple(float(v) for v in x)
        state = simulate(bind(ansatz, qaoa_values(params[:layers], params[layers:])))
        value = expectation_qubo(state, q, values)
        trace.append((params, value))
        return value

    def best_index() -> int:
        return min(range(len(trace)), key=lambda i: (trace[i][1], i))

    try:
        for point in _grid_candidates(layers, seed):
            objective(point)
        start = np.array(trace[best_index()][0])
        step = np.concatenate([
            np.full(layers, math.pi / GRID_POINTS / 2),
            np.full(layers, math.pi / 2 / GRID_POINTS / 2),
        ])
        simplex = np.vstack([start] + [start + np.eye(2 * layers)[i] * step[i] for i in range(2 * layers)])
        scale = max(1.0, abs(trace[best_index()][1]))
        minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": 1e-6,
                "fatol": 1e-6 * scale,
                "maxfev": budget,
            },
        )
    except _BudgetExhausted:
        pass

    params, value = trace[best_index()]
    return OptimizationResult(
        (tuple(params[:layers]), tuple(params[layers:])),
        value,
        len(trace),
        trace,
    )
