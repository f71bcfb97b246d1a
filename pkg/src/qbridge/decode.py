"""Decode assignments and histograms into domain solutions."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Sequence

import numpy as np

from .circuit import Circuit
from .dsl import Graph, ProblemFamily
from .errors import DimensionError, NonClassicalOutputError
from .qubo import Qubo, factor_values
from .simulator import Histogram, StateVector, index_to_bitstring

CLASSICAL_THRESHOLD = 0.999

MAXIMIZE = frozenset({ProblemFamily.MAXCUT, ProblemFamily.MIS, ProblemFamily.CLIQUE})


@dataclass(frozen=True)
class Solution:
    """Decoded outcome.

    ``value`` depends on ``kind``: a sorted vertex tuple (``subset``), a
    vertex-to-colour tuple (``coloring``, ``None`` for rows that are not
    one-hot), a vertex order (``tour``), ``(p, q)`` (``factors``) or an int
    (``integer``).  ``objective`` always comes from the classical evaluator.
    """

    family: ProblemFamily
    kind: str
    value: Any
    objective: float
    violations: tuple[str, ...] = ()
    bitstring: str | None = None
    details: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        value = self.value
        if isinstance(value, tuple):
            value = list(value)
        out = {
            "family": self.family.value,
            "kind": self.kind,
            "value": value,
            "objective": self.objective,
            "feasible": self.feasible,
            "violations": list(self.violations),
        }
        if self.bitstring is not None:
            out["bitstring"] = self.bitstring
        out.update(self.details)
        return out


def _bits(bits, dim: int) -> tuple[int, ...]:
    if isinstance(bits, str):
        if any(ch not in "01" for ch in bits):
            raise DimensionError(f"bitstring {bits!r} contains characters other than 0/1")
        out = tuple(int(ch) for ch in bits)
    else:
        out = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in out):
            raise DimensionError("assignment entries must be 0 or 1")
    if len(out) != dim:
        raise DimensionError(f"assignment of length {len(out)} for a dim-{dim} QUBO")
    return out


def _bitstring(x: Sequence[int]) -> str:
    return "".join(str(b) for b in x)


# -- classical evaluators (also used as oracles for brute force) -----------------


def cut_value(g: Graph, side: Sequence[int]) -> float:
    s = set(side)
    return float(sum(g.weight(u, v) for u, v in g.edges if (u in s) != (v in s)))


def tour_length(g: Graph, tour: Sequence[int]) -> float:
    n = len(tour)
    return float(sum(g.weight(tour[t], tour[(t + 1) % n]) for t in range(n)))


def _subset_solution(family: ProblemFamily, g: Graph, x: tuple[int, ...]) -> Solution:
    chosen = tuple(i for i, b in enumerate(x) if b)
    s = set(chosen)
    violations: list[str] = []
    if family is ProblemFamily.MAXCUT:
        obj = cut_value(g, chosen)
    elif family is ProblemFamily.MIS:
        violations = [f"edge ({u},{v}) inside set" for u, v in g.edges if u in s and v in s]
        obj = float(len(chosen))
    elif family is ProblemFamily.CLIQUE:
        violations = [f"non-edge ({u},{v}) inside set" for u, v in combinations(chosen, 2) if not g.has_edge(u, v)]
        obj = float(len(chosen))
    else:  # vertex cover
        violations = [f"edge ({u},{v}) not covered" for u, v in g.edges if u not in s and v not in s]
        obj = float(len(chosen))
    return Solution(family, "subset", chosen, obj, tuple(violations), _bitstring(x))


def _onehot_rows(x: Sequence[int], rows: int, cols: int) -> list[int | None]:
    out: list[int | None] = []
    for r in range(rows):
        row = x[r * cols:(r + 1) * cols]
        out.append(row.index(1) if sum(row) == 1 else None)
    return out


def _coloring_solution(g: Graph, q: Qubo, x: tuple[int, ...]) -> Solution:
    n = g.vertex_count
    k = q.dim // n if n else 0
    colours = _onehot_rows(list(x), n, k)
    violations = [
        f"vertex {v} has {sum(x[v * k:(v + 1) * k])} colours" for v, c in enumerate(colours) if c is None
    ]
    for u, v in g.edges:
        if colours[u] is not None and colours[u] == colours[v]:
            violations.append(f"edge ({u},{v}) monochromatic")
    # objective: number of violated constraints (0 for a proper colouring)
    return Solution(ProblemFamily.KCOLORING, "coloring", tuple(colours), float(len(violations)), tuple(violations), _bitstring(x))


def _tour_solution(g: Graph, x: tuple[int, ...]) -> Solution:
    n = g.vertex_count
    violations = []
    for v in range(n):
        c = sum(x[v * n:(v + 1) * n])
        if c != 1:
            violations.append(f"vertex {v} visited {c} times")
    at: list[int | None] = []
    for t in range(n):
        who = [v for v in range(n) if x[v * n + t]]
        if len(who) != 1:
            violations.append(f"position {t} holds {len(who)} vertices")
            at.append(None)
        else:
            at.append(who[0])
    if violations:
        return Solution(ProblemFamily.TSP, "tour", tuple(at), float("nan"), tuple(violations), _bitstring(x))
    return Solution(ProblemFamily.TSP, "tour", tuple(at), tour_length(g, at), (), _bitstring(x))


def _factor_solution(q: Qubo, n: int, x: tuple[int, ...]) -> Solution:
    p, r = factor_values(q, x)
    idx = {lab: i for i, lab in enumerate(q.labels)}
    violations = []
    for lab, i in idx.items():
        if lab[0] == "w":
            want = x[idx[("p", lab[1])]] * x[idx[("q", lab[2])]]
            if x[i] != want:
                violations.append(f"ancilla w_{lab[1]}_{lab[2]} != p_{lab[1]}*q_{lab[2]}")
    details = {"n": n, "product": p * r, "exact": p * r == n}
    return Solution(ProblemFamily.FACTOR, "factors", (p, r), float((n - p * r) ** 2), tuple(violations), _bitstring(x), details)


def decode_bits(family: ProblemFamily | str, q: Qubo, bits, instance: Graph | int | None = None) -> Solution:
    """Invert the variable labels of ``q`` for one assignment.

    ``instance`` is the canonical graph for graph families and ``n`` for
    Factor (recovered from nothing else, since the QUBO mixes it in).
    """
    family = ProblemFamily(family)
    x = _bits(bits, q.dim)
    if family is ProblemFamily.FACTOR:
        if not isinstance(instance, int):
            raise TypeError("Factor decoding needs the integer n")
        return _factor_solution(q, instance, x)
    if not isinstance(instance, Graph):
        raise TypeError(f"{family.value} decoding needs the canonical graph")
    if family is ProblemFamily.KCOLORING:
        return _coloring_solution(instance, q, x)
    if family is ProblemFamily.TSP:
        return _tour_solution(instance, x)
    return _subset_solution(family, instance, x)


def _better(family: ProblemFamily, a: float, b: float) -> bool:
    return a > b if family in MAXIMIZE else a < b


def best_of(hist: Histogram, family: ProblemFamily | str, q: Qubo, instance: Graph | int | None = None) -> Solution:
    """Best feasible observed outcome; least-violating one if none is feasible.

    Ties go to the higher count, then the lexicographically smaller bitstring.
    """
    family = ProblemFamily(family)
    if not hist.counts:
        raise ValueError("histogram is empty")
    ranked = hist.most_common()  # count desc, then bitstring asc
    best: Solution | None = None
    fallback: Solution | None = None
    for bitstring, count in ranked:
        sol = decode_bits(family, q, bitstring, instance)
        if sol.feasible:
            if best is None or _better(family, sol.objective, best.objective):
                best = sol
        elif fallback is None or len(sol.violations) < len(fallback.violations):
            fallback = sol
    chosen = best if best is not None else fallback
    counts = dict(hist.counts)
    return Solution(
        chosen.family, chosen.kind, chosen.value, chosen.objective, chosen.violations,
        chosen.bitstring, {**chosen.details, "count": counts[chosen.bitstring]},
    )


def approximation_ratio(family: ProblemFamily, achieved: float, optimum: float) -> float | None:
    """``achieved / optimum``; undefined when the optimum is zero."""
    if optimum == 0 or not np.isfinite(achieved):
        return None
    return achieved / optimum


# -- arithmetic -------------------------------------------------------------------------


def dominant_basis_state(state: StateVector, threshold: float = CLASSICAL_THRESHOLD) -> tuple[int, float]:
    probs = state.probabilities()
    k = int(np.argmax(probs))
    if probs[k] < threshold:
        raise NonClassicalOutputError(
            f"largest basis-state probability is {probs[k]:.6f} (< {threshold})"
        )
    return k, float(probs[k])


def decode_arithmetic(state: StateVector, c: Circuit, family: ProblemFamily | str | None = None,
                      expected: int | None = None, inputs: dict[int, int] | None = None) -> Solution:
    """Read the output register of a classical-valued arithmetic result.

    ``inputs`` (qubit -> bit) lets the decoder check that every non-output
    register holds its starting value (inputs unchanged, carry restored).
    """
    k, prob = dominant_basis_state(state)
    fam = ProblemFamily(family) if family is not None else ProblemFamily.ADD
    out_reg = next(r for r in c.registers if r.role == "output")
    result = sum(((k >> q) & 1) << i for i, q in enumerate(out_reg.qubits))
    violations = []
    if inputs is not None:
        for r in c.registers:
            if r.role == "output":
                continue
            for q in r.qubits:
                if ((k >> q) & 1) != inputs.get(q, 0):
                    violations.append(f"register {r.name} qubit {q} not restored")
    details: dict = {"probability": prob}
    if expected is not None:
        details["expected"] = expected
        details["correct"] = result == expected
        if result != expected:
            violations.append(f"result {result} != expected {expected}")
    return Solution(fam, "integer", result, float(result), tuple(violations),
                    index_to_bitstring(k, c.qubit_count), details)


def headline(sol: Solution) -> str:
    """One-line human-readable statement of a solution."""
    fam = sol.family
    status = "" if sol.feasible else f" (infeasible: {len(sol.violations)} violation(s))"
    if sol.kind == "factors":
        p, q = sorted(sol.value)
        if sol.details.get("exact"):
            return f"factors {p} x {q}{status}"
        return f"no exact factorization found (closest {p} x {q} = {p * q}){status}"
    if sol.kind == "integer":
        return f"result {sol.value}{status}"
    if sol.kind == "tour":
        return f"tour {' -> '.join(str(v) for v in sol.value)} of length {sol.objective:g}{status}"
    if sol.kind == "coloring":
        return f"colouring {list(sol.value)}{status}"
    members = "{" + ", ".join(str(v) for v in sol.value) + "}"
    if fam is ProblemFamily.MAXCUT:
        return f"cut {members} of weight {sol.objective:g}{status}"
    label = {"MIS": "independent set", "Clique": "clique", "VertexCover": "vertex cover"}[fam.value]
    return f"{label} {members} of size {len(sol.value)}{status}"
