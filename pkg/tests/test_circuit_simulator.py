from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

from qbridge.circuit import Circuit, Gate, bind, load_circuit, prepare_basis, qaoa_circuit, qaoa_values
from qbridge.dsl import Graph
from qbridge.errors import DimensionError, QBridgeError, SizeError, UnboundParameterError
from qbridge.qubo import basis_values, brute_force_minimum, qubo_maxcut, qubo_mis
from qbridge.simulator import (
    StateVector,
    bitstring_to_index,
    expectation_qubo,
    index_to_bitstring,
    optimize_qaoa,
    sample,
    simulate,
)

from .test_acceptance import _oracle_action, random_circuit


# -- gates and circuits ------------------------------------------------------------


def test_gate_validation():
    with pytest.raises(QBridgeError):
        Gate("CZ", (0, 1))
    with pytest.raises(QBridgeError):
        Gate("CX", (0,))
    with pytest.raises(QBridgeError):
        Gate("CX", (1, 1))
    with pytest.raises(QBridgeError):
        Gate("RX", (0,))
    with pytest.raises(QBridgeError):
        Gate("H", (0,), 1.0)
    with pytest.raises(QBridgeError):
        Circuit(1, (Gate("CX", (0, 1)),))


def test_depth_and_counts():
    c = Circuit(3, (Gate("X", (0,)), Gate("X", (1,)), Gate("CX", (0, 1)), Gate("H", (2,))))
    assert c.depth() == 2
    assert c.gate_counts() == {"X": 2, "CX": 1, "H": 1}
    assert Circuit(2).depth() == 0


def test_dump_load_round_trip():
    q = qubo_maxcut(Graph(3, ((0, 1), (1, 2))))
    c = qaoa_circuit(q, 2)
    again = load_circuit(c.dump(), c.qubit_count)
    assert again.gates == c.gates
    assert set(again.parameters) == set(c.parameters)


def test_bind_requires_every_parameter():
    c = qaoa_circuit(qubo_maxcut(Graph(2, ((0, 1),))), 1)
    with pytest.raises(UnboundParameterError):
        bind(c, {"gamma_1": 0.1})
    with pytest.raises(UnboundParameterError):
        simulate(c)
    assert bind(c, qaoa_values([0.1], [0.2])).is_executable


def test_qaoa_structure():
    g = Graph(3, ((0, 1), (1, 2), (0, 2)))
    c = qaoa_circuit(qubo_maxcut(g), 2)
    counts = c.gate_counts()
    assert counts["H"] == 3 and counts["RZZ"] == 6 and counts["RX"] == 6
    assert "RZ" not in counts  # MaxCut has no local fields
    assert c.parameters == ("gamma_1", "gamma_2", "beta_1", "beta_2")


# -- simulator ---------------------------------------------------------------------


def test_qubit_zero_is_least_significant():
    s = simulate(Circuit(3, (Gate("X", (0,)),)))
    assert s.probabilities()[1] == pytest.approx(1)
    assert index_to_bitstring(1, 3) == "100"
    assert bitstring_to_index("100") == 1


@pytest.mark.parametrize("n", [1, 2, 4])
def test_gate_actions_on_every_basis_state(n):
    kinds = [("X", 1), ("H", 1), ("SX", 1), ("RX", 1), ("RZ", 1), ("CX", 2), ("SWAP", 2), ("RZZ", 2), ("CCX", 3)]
    rng = np.random.default_rng(n)
    for kind, arity in kinds:
        if arity > n:
            continue
        for _ in range(4):
            qs = tuple(int(q) for q in rng.choice(n, arity, replace=False))
            angle = float(rng.uniform(-4, 4)) if kind in ("RX", "RZ", "RZZ") else None
            g = Gate(kind, qs, angle)
            for k in range(2**n):
                got = simulate(Circuit(n, (g,)), StateVector.basis(k, n)).amplitudes
                np.testing.assert_allclose(got, _oracle_action(g, k, n), atol=1e-12)


@given(st.integers(1, 5), st.integers(0, 40), st.integers(0, 2**32 - 1))
def test_norm_preserved_after_every_gate(n, length, seed):
    c = random_circuit(np.random.default_rng(seed), n, length)
    norms = []
    simulate(c, observer=lambda i, g, a: norms.append(float(np.vdot(a, a).real)))
    assert len(norms) == length
    assert all(abs(v - 1) <= 1e-10 for v in norms)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_inverse_returns_to_start(n, seed):
    c = random_circuit(np.random.default_rng(seed), n, 15)
    s = simulate(c.compose(c.inverse()))
    assert abs(s.amplitudes[0]) == pytest.approx(1, abs=1e-9)


def test_initial_state_width_checked():
    with pytest.raises(DimensionError):
        simulate(Circuit(2), StateVector.basis(0, 3))


def test_size_cap():
    with pytest.raises(SizeError):
        simulate(Circuit(23))


def test_prepare_basis():
    c = prepare_basis(Circuit(3), {0: 1, 2: 1})
    assert simulate(c).probabilities()[0b101] == pytest.approx(1)


def test_sampling_reproducible_and_sums_to_shots():
    s = simulate(Circuit(3, tuple(Gate("H", (q,)) for q in range(3))))
    a, b = sample(s, 1000, seed=5), sample(s, 1000, seed=5)
    assert a == b
    assert sum(a.counts.values()) == 1000
    assert sample(s, 1000, seed=6) != a


def test_sampling_never_leaves_support():
    s = simulate(Circuit(2, (Gate("H", (0,)), Gate("CX", (0, 1)))))
    assert set(sample(s, 5000, seed=1).counts) <= {"00", "11"}


@pytest.mark.parametrize("seed", range(3))
def test_sampling_chi_square(seed):
    c = Circuit(2, (Gate("RX", (0,), 1.2), Gate("RX", (1,), 0.5)))
    state = simulate(c)
    probs = state.probabilities()
    hist = sample(state, 50000, seed=seed)
    observed = [hist.counts.get(index_to_bitstring(k, 2), 0) for k in range(4)]
    assert chisquare(observed, probs * 50000).pvalue > 0.001


def test_expectation_matches_weighted_sum():
    q = qubo_mis(Graph(3, ((0, 1), (1, 2))))
    s = simulate(bind(qaoa_circuit(q), qaoa_values([0.3], [0.2])))
    assert expectation_qubo(s, q) == pytest.approx(float(s.probabilities() @ basis_values(q)))
    with pytest.raises(DimensionError):
        expectation_qubo(StateVector.basis(0, 2), q)


def test_uniform_superposition_gives_mean_value():
    q = qubo_maxcut(Graph(4, ((0, 1), (1, 2), (2, 3))))
    s = simulate(bind(qaoa_circuit(q), qaoa_values([0.0], [0.0])))
    assert expectation_qubo(s, q) == pytest.approx(-1.5)


def test_optimizer_budget_and_improvement():
    g = Graph.from_edges([(0, 1), (1, 2), (2, 3), (3, 0)])
    q = qubo_maxcut(g)
    res = optimize_qaoa(q, layers=1, budget=100, seed=1)
    assert res.evaluations <= 100 and len(res.trace) == res.evaluations
    best = res.best_so_far()
    assert all(a >= b for a, b in zip(best, best[1:]))
    assert res.best_expectation == best[-1]
    assert res.best_expectation < -2.0  # beats the uniform mean of -|E|/2
    # deterministic given the seed
    assert optimize_qaoa(q, 1, 100, 1).best_params == res.best_params


def test_optimizer_small_budget_and_deeper_layers():
    q = qubo_maxcut(Graph(3, ((0, 1), (1, 2))))
    assert optimize_qaoa(q, 1, 5, 0).evaluations == 5
    res = optimize_qaoa(q, 2, 120, 0)
    assert len(res.best_params[0]) == 2
    opt, _ = brute_force_minimum(q)
    assert res.best_expectation >= opt - 1e-9
    with pytest.raises(QBridgeError):
        optimize_qaoa(q, 0, 10)
