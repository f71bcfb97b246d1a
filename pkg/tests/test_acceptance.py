"""Acceptance gate: one test per criterion, each at its stated tolerance.

A pass/fail line per criterion is printed in the terminal summary.
"""

from __future__ import annotations

import csv
import json
import math
import time
from itertools import product
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import chisquare

from qbridge.arithmetic import adder_circuit, input_bits, multiplier_circuit, subtractor_circuit
from qbridge.circuit import Circuit, Gate, bind, qaoa_circuit, qaoa_values
from qbridge.cli import main
from qbridge.decode import best_of, decode_bits
from qbridge.devices import load_catalog
from qbridge.dsl import ProblemFamily, parse_spec
from qbridge.encode import encode_spec
from qbridge.qubo import (
    brute_force_minimum,
    factor_register_width,
    qubo_clique,
    qubo_factor,
    qubo_kcoloring,
    qubo_maxcut,
    qubo_mis,
    qubo_tsp,
    qubo_vertex_cover,
)
from qbridge.simulator import StateVector, optimize_qaoa, sample, simulate
from qbridge.transpiler import coupling_violations, layout_corrected, transpile, verify_equivalence

from . import oracles

SMOKE_FAMILIES = {"ADD", "Factor", "MaxCut", "MIS"}


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


# 1 ---------------------------------------------------------------------------------


@pytest.mark.criterion(1, "smoke indicator: 4x4 QUBO and 4-qubit QAOA circuit")
def test_criterion_01_smoke_indicator(tmp_path, data_dir):
    code, elapsed = _timed(lambda: main([
        "run", "--input", str(data_dir / "smoke" / "maxcut_01.json"), "--out", str(tmp_path),
    ]))
    assert code == 0
    report = json.loads((tmp_path / "maxcut_01" / "report.json").read_text())
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert report["qcf"]["shape"] == [4, 4]
    assert len(report["qcf"]["matrix"]) == 4 and all(len(r) == 4 for r in report["qcf"]["matrix"])
    assert report["circuit"]["kind"] == "qaoa" and report["circuit"]["qubits"] == 4
    assert report["summary"].startswith("4x4 QUBO matrix and a 4-qubit QAOA circuit")
    assert summary["instances"][0]["summary"] == report["summary"]
    assert elapsed < 10, f"took {elapsed:.1f}s"


# 2 ---------------------------------------------------------------------------------


@pytest.mark.criterion(2, "JSON smoke batch: four feasible reports (ADD, Factor, MaxCut, MIS)")
def test_criterion_02_smoke_batch(tmp_path):
    code, elapsed = _timed(lambda: main(["batch", "--out", str(tmp_path)]))
    assert code == 0
    reports = sorted(tmp_path.glob("*/report.json"))
    assert len(reports) == 4
    assert len(sorted(tmp_path.glob("*/report.md"))) == 4
    docs = [json.loads(p.read_text()) for p in reports]
    assert {d["spec"]["family"] for d in docs} == SMOKE_FAMILIES
    for d in docs:
        assert d["solution"]["feasible"], d["instance"]
        assert d["status"] == "ok"
    by_family = {d["spec"]["family"]: d for d in docs}
    assert by_family["ADD"]["quality"]["correct"] is True
    assert sorted(by_family["Factor"]["solution"]["value"]) == [3, 5]
    assert by_family["MIS"]["solution"]["objective"] == 2
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["total"] == 4 and summary["passed"] == 4
    assert elapsed < 60, f"took {elapsed:.1f}s"


# 3 ---------------------------------------------------------------------------------


def _read_csv(path: Path) -> list[list[str]]:
    with path.open(newline="") as fh:
        return list(csv.reader(fh))


@pytest.mark.criterion(3, "recommender: Quantinuum H-series wins every eligible row, deterministic")
def test_criterion_03_recommender(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    code, elapsed = _timed(lambda: main(["recommend", "--out", str(a)]))
    assert code == 0
    assert main(["recommend", "--out", str(b)]) == 0
    rows = _read_csv(a / "winners.csv")
    assert rows[0] == ["n", "winner", "provider", "score"]
    sizes = [int(r[0]) for r in rows[1:]]
    assert sizes == list(range(4, 57, 4))
    catalog = {d.name: d for d in load_catalog()}
    for n, winner, provider, _ in rows[1:]:
        assert provider == "Quantinuum" and catalog[winner].provider == "Quantinuum", (n, winner)
    for name in ("errors_wide.csv", "times_wide.csv", "prices_wide.csv", "winners.csv", "details.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    assert elapsed < 120, f"took {elapsed:.1f}s"


# 4 ---------------------------------------------------------------------------------


def _subset_set(family, q, minimizers, g):
    return {frozenset(decode_bits(family, q, m, g).value) for m in minimizers}


def _check_graph_family(family: str, seed: int) -> list[str]:
    rng = np.random.default_rng(seed)
    mismatches = []
    for trial in range(50):
        if family == "TSP":
            g = oracles.complete_graph(rng, int(rng.integers(3, 5)))
            q = qubo_tsp(g)
            _, minimizers = brute_force_minimum(q)
            got = {decode_bits(family, q, m, g).value for m in minimizers}
            _, want = oracles.tsp_optima(g)
        elif family == "KColoring":
            k = int(rng.integers(2, 4))
            n = int(rng.integers(2, 20 // k + 1))
            g = oracles.random_graph(rng, n, 0.4)
            q = qubo_kcoloring(g, k)
            best, minimizers = brute_force_minimum(q)
            want = oracles.proper_colorings(g, k)
            if want:
                got = {decode_bits(family, q, m, g).value for m in minimizers}
                if abs(best) > 1e-9:
                    mismatches.append(f"{family}#{trial}: colourable but minimum {best}")
            else:
                # no proper colouring exists: the minimum must flag it and no minimizer may decode feasibly
                got = set()
                if best <= 1e-9 or any(decode_bits(family, q, m, g).feasible for m in minimizers):
                    mismatches.append(f"{family}#{trial}: non-colourable graph decoded as feasible")
        else:
            n = int(rng.integers(1, 11))
            g = oracles.random_graph(rng, n, float(rng.uniform(0.2, 0.8)), weighted=(family == "MaxCut" and trial % 2 == 1))
            encoder, oracle = {
                "MaxCut": (qubo_maxcut, oracles.maxcut_optima),
                "MIS": (qubo_mis, oracles.mis_optima),
                "Clique": (qubo_clique, oracles.clique_optima),
                "VertexCover": (qubo_vertex_cover, oracles.vertex_cover_optima),
            }[family]
            q = encoder(g)
            _, minimizers = brute_force_minimum(q)
            got = _subset_set(family, q, minimizers, g)
            _, want = oracle(g)
        if got != want:
            mismatches.append(f"{family}#{trial}: {len(got)} decoded vs {len(want)} oracle optima")
    return mismatches


def _check_factor(seed: int) -> list[str]:
    rng = np.random.default_rng(seed)
    mismatches = []
    for trial in range(50):
        n = int(rng.choice(np.arange(9, 48, 2)))
        q = qubo_factor(n)
        assert q.dim <= 20
        best, minimizers = brute_force_minimum(q)
        sols = [decode_bits("Factor", q, m, n) for m in minimizers]
        want_best, want = oracles.factor_optima(n, factor_register_width(n))
        if {s.value for s in sols} != want or abs(best - want_best) > 1e-9 or not all(s.feasible for s in sols):
            mismatches.append(f"Factor({n})")
    return mismatches


@pytest.mark.criterion(4, "QUBO oracle equivalence: 7 families x 50 instances, zero mismatches")
def test_criterion_04_qubo_oracles():
    mismatches = []
    for i, family in enumerate(["MaxCut", "MIS", "TSP", "Clique", "KColoring", "VertexCover"]):
        mismatches += _check_graph_family(family, 1000 + i)
    mismatches += _check_factor(2000)
    assert mismatches == []


# 5 ---------------------------------------------------------------------------------


@pytest.mark.criterion(5, "factorization: 15 -> 3x5, 9 -> 3x3, 11 -> no exact factorization")
def test_criterion_05_factorization():
    def ground(n):
        q = qubo_factor(n)
        best, minimizers = brute_force_minimum(q)
        return best, [decode_bits("Factor", q, m, n) for m in minimizers]

    best, sols = ground(15)
    assert best == pytest.approx(0.0, abs=1e-9)
    assert {tuple(sorted(s.value)) for s in sols} == {(3, 5)}
    assert all(s.details["exact"] for s in sols)

    best, sols = ground(9)
    assert best == pytest.approx(0.0, abs=1e-9)
    assert {tuple(sorted(s.value)) for s in sols} == {(3, 3)}

    best, sols = ground(11)
    assert best > 0
    assert not any(s.details["exact"] for s in sols)


# 6 ---------------------------------------------------------------------------------


def _arith_failures(build, n: int, fn, output: str, extra_inputs: tuple[str, ...]) -> list[str]:
    c = build(n)
    failures = []
    for a, b in product(range(2**n), repeat=2):
        bits = input_bits(c, a, b)
        start = sum(1 << q for q, v in bits.items() if v)
        probs = simulate(c, StateVector.basis(start, c.qubit_count)).probabilities()
        k = int(np.argmax(probs))
        reg = c.register(output)
        result = sum(((k >> q) & 1) << i for i, q in enumerate(reg.qubits))
        restored = all(((k >> q) & 1) == bits.get(q, 0) for r in c.registers if r.name != output for q in r.qubits)
        if probs[k] < 1 - 1e-10 or result != fn(a, b) or not restored:
            failures.append(f"{c.name} n={n} a={a} b={b}")
    return failures


@pytest.mark.criterion(6, "arithmetic exhaustiveness: add/sub n<=3, mul n<=2, all inputs")
def test_criterion_06_arithmetic():
    start = time.perf_counter()
    failures = []
    for n in (1, 2, 3):
        failures += _arith_failures(adder_circuit, n, lambda a, b: (a + b) % 2**n, "b", ())
        failures += _arith_failures(subtractor_circuit, n, lambda a, b: (b - a) % 2**n, "b", ())
    for n in (1, 2):
        failures += _arith_failures(multiplier_circuit, n, lambda a, b: a * b, "product", ())
    assert failures == []
    assert time.perf_counter() - start < 300


# 7 ---------------------------------------------------------------------------------

_KINDS_1Q = ("X", "H", "SX", "RX", "RZ")
_KINDS_2Q = ("CX", "SWAP", "RZZ")


def random_circuit(rng: np.random.Generator, n: int, length: int) -> Circuit:
    gates = []
    kinds = _KINDS_1Q + (_KINDS_2Q if n >= 2 else ()) + (("CCX",) if n >= 3 else ())
    for _ in range(length):
        kind = str(rng.choice(kinds))
        arity = 3 if kind == "CCX" else 2 if kind in _KINDS_2Q else 1
        qubits = tuple(int(q) for q in rng.choice(n, size=arity, replace=False))
        angle = float(rng.uniform(-math.pi, math.pi)) if kind in ("RX", "RZ", "RZZ") else None
        gates.append(Gate(kind, qubits, angle))
    return Circuit(n, tuple(gates))


@pytest.mark.criterion(7, "transpiler: 200 random circuits x every device, fidelity >= 1-1e-9")
def test_criterion_07_transpiler():
    rng = np.random.default_rng(77)
    catalog = load_catalog()
    worst = 1.0
    violations = 0
    for _ in range(200):
        n = int(rng.integers(1, 5))
        c = random_circuit(rng, n, int(rng.integers(1, 13)))
        for device in catalog:
            result = transpile(c, device)
            violations += len(coupling_violations(result.circuit, device.coupling))
            corrected = layout_corrected(result.circuit, result.layout, n)
            worst = min(worst, verify_equivalence(c, corrected, max_qubits=8))
    assert violations == 0
    assert worst >= 1 - 1e-9, worst


# 8 ---------------------------------------------------------------------------------


@pytest.mark.criterion(8, "QAOA effectiveness: optimum in best-of-shots >= 18/20, beats uniform 20/20")
def test_criterion_08_qaoa_effectiveness():
    hits = better = 0
    for i in range(20):
        g = oracles.regular_graph(8, seed=500 + i)
        q = qubo_maxcut(g)
        opt = optimize_qaoa(q, layers=1, budget=200, seed=i)
        bound = bind(qaoa_circuit(q, 1), qaoa_values(*opt.best_params))
        hist = sample(simulate(bound), 4096, seed=i)
        found = best_of(hist, "MaxCut", q, g)
        optimum, _ = oracles.maxcut_optima(g)
        hits += found.objective == optimum
        uniform = -len(g.edges) / 2  # mean cut of a uniform assignment is |E|/2
        better += opt.best_expectation < uniform - 1e-9
    assert hits >= 18, hits
    assert better == 20, better


# 9 ---------------------------------------------------------------------------------


@pytest.mark.criterion(9, "determinism: identical report.json and CSVs, also with parallel batch")
def test_criterion_09_determinism(tmp_path, data_dir):
    corpus = str(data_dir / "corpus")
    assert main(["batch", "--input", corpus, "--out", str(tmp_path / "serial")]) == 0
    assert main(["batch", "--input", corpus, "--out", str(tmp_path / "again")]) == 0
    assert main(["batch", "--input", corpus, "--out", str(tmp_path / "parallel"), "--jobs", "3"]) == 0
    serial = sorted(p.relative_to(tmp_path / "serial") for p in (tmp_path / "serial").glob("*/report.json"))
    assert len(serial) >= 10
    for rel in serial + [Path("summary.json")]:
        ref = (tmp_path / "serial" / rel).read_bytes()
        assert (tmp_path / "again" / rel).read_bytes() == ref, rel
        assert (tmp_path / "parallel" / rel).read_bytes() == ref, rel

    sizes = "4,8,12,16"
    assert main(["recommend", "--sizes", sizes, "--out", str(tmp_path / "r1")]) == 0
    assert main(["recommend", "--sizes", sizes, "--out", str(tmp_path / "r2"), "--jobs", "2"]) == 0
    for name in ("errors_wide.csv", "times_wide.csv", "prices_wide.csv", "winners.csv", "details.csv"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes(), name


# 10 ---------------------------------------------------------------------------------


def _oracle_action(gate: Gate, k: int, n: int) -> np.ndarray:
    """Output state of ``gate`` on basis state ``k`` from closed-form gate rules."""
    out = np.zeros(2**n, dtype=complex)
    bit = lambda q: (k >> q) & 1  # noqa: E731
    flip = lambda idx, q: idx ^ (1 << q)  # noqa: E731
    kind, qs, t = gate.kind, gate.qubits, gate.angle
    if kind == "X":
        out[flip(k, qs[0])] = 1
    elif kind == "H":
        out[k & ~(1 << qs[0])] += 1 / math.sqrt(2)
        out[k | (1 << qs[0])] += (-1) ** bit(qs[0]) / math.sqrt(2)
    elif kind == "SX":
        out[k] += (1 + 1j) / 2
        out[flip(k, qs[0])] += (1 - 1j) / 2
    elif kind == "RX":
        out[k] += math.cos(t / 2)
        out[flip(k, qs[0])] += -1j * math.sin(t / 2)
    elif kind == "RZ":
        out[k] = np.exp(1j * t / 2 * (1 if bit(qs[0]) else -1))
    elif kind == "RZZ":
        out[k] = np.exp(1j * t / 2 * (1 if bit(qs[0]) ^ bit(qs[1]) else -1))
    elif kind == "CX":
        out[flip(k, qs[1]) if bit(qs[0]) else k] = 1
    elif kind == "CCX":
        out[flip(k, qs[2]) if bit(qs[0]) and bit(qs[1]) else k] = 1
    elif kind == "SWAP":
        a, b = qs
        j = k
        if bit(a) != bit(b):
            j = flip(flip(k, a), b)
        out[j] = 1
    return out


def _regression_circuits(data_dir: Path) -> list[tuple[Circuit, StateVector | None]]:
    circuits = []
    for path in sorted((data_dir / "corpus").glob("*.json")):
        for task in encode_spec(parse_spec(path.read_bytes())):
            if task.is_arithmetic:
                build = {ProblemFamily.ADD: adder_circuit, ProblemFamily.SUB: subtractor_circuit,
                         ProblemFamily.MUL: multiplier_circuit}[task.family]
                c = build(task.arithmetic.bits)
                bits = input_bits(c, task.arithmetic.a, task.arithmetic.b)
                circuits.append((c, StateVector.basis(sum(1 << q for q, v in bits.items() if v), c.qubit_count)))
            else:
                circuits.append((bind(qaoa_circuit(task.qubo), qaoa_values([0.7], [0.3])), None))
    return circuits


@pytest.mark.criterion(10, "simulator numerics: norm 1e-10 per gate, exhaustive gate checks, chi-square")
def test_criterion_10_simulator_numerics(data_dir):
    # (a) normalization after every gate across the regression corpus
    worst = 0.0

    def observer(i, gate, amps):
        nonlocal worst
        worst = max(worst, abs(float(np.vdot(amps, amps).real) - 1.0))

    circuits = _regression_circuits(data_dir)
    assert len(circuits) >= 10
    for c, start in circuits:
        simulate(c, start, observer=observer)
    assert worst <= 1e-10, worst

    # (b) every gate kind, every operand placement on 3 qubits, every basis input
    n = 3
    angles = (0.0, 0.37, -1.9, math.pi)
    for kind, arity in (("X", 1), ("H", 1), ("SX", 1), ("RX", 1), ("RZ", 1), ("CX", 2), ("SWAP", 2), ("RZZ", 2), ("CCX", 3)):
        placements = [p for p in product(range(n), repeat=arity) if len(set(p)) == arity]
        for qs in placements:
            for t in angles if kind in ("RX", "RZ", "RZZ") else (None,):
                g = Gate(kind, qs, t)
                for k in range(2**n):
                    got = simulate(Circuit(n, (g,)), StateVector.basis(k, n)).amplitudes
                    np.testing.assert_allclose(got, _oracle_action(g, k, n), atol=1e-12, err_msg=str(g))

    # (c) chi-square goodness of fit on fixed reference states
    references = [
        Circuit(2, (Gate("H", (0,)), Gate("CX", (0, 1)))),
        Circuit(3, (Gate("H", (0,)), Gate("RX", (1,), 1.1), Gate("RZZ", (0, 2), 0.6), Gate("H", (2,)))),
        Circuit(3, (Gate("RX", (0,), 0.4), Gate("RX", (1,), 2.0), Gate("CX", (1, 2)), Gate("SX", (0,)))),
    ]
    for i, c in enumerate(references):
        state = simulate(c)
        probs = state.probabilities()
        shots = 20000
        hist = sample(state, shots, seed=300 + i)
        support = np.flatnonzero(probs > 1e-12)
        observed = np.array([hist.counts.get(format_bits(j, c.qubit_count), 0) for j in support])
        assert observed.sum() == shots  # nothing sampled outside the support
        expected = probs[support] / probs[support].sum() * shots
        p_value = chisquare(observed, expected).pvalue
        assert p_value > 0.001, (i, p_value)


def format_bits(index: int, n: int) -> str:
    return "".join(str((index >> q) & 1) for q in range(n))
