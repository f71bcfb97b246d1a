from __future__ import annotations

import numpy as np
import pytest
from sklearn.base import clone

from qbridge.dsl import Graph
from qbridge.errors import InputError, ShapeError
from qbridge.estimators import DeviceRecommender, QAOASolver, QuboEncoder
from qbridge.qubo import brute_force_minimum, qubo_maxcut
from qbridge.recommender import sweep_circuit

K3 = [(0, 1), (1, 2), (0, 2)]


def test_get_params_and_clone():
    for est in (QuboEncoder("MIS", penalty=3.0), QAOASolver(layers=2, shots=100), DeviceRecommender(shots=64)):
        params = est.get_params()
        twin = clone(est)
        assert twin.get_params() == params and twin is not est
    assert QAOASolver().set_params(budget=50).budget == 50


def test_encoder_matches_direct_encoding():
    enc = QuboEncoder("MaxCut").fit()
    (q,) = enc.transform([K3])
    assert q == qubo_maxcut(Graph.from_edges(K3))


def test_encoder_checks_family():
    with pytest.raises(InputError):
        QuboEncoder("ADD").fit()
    with pytest.raises(InputError):
        QuboEncoder("KColoring").fit()
    assert QuboEncoder("KColoring", k=3).fit().transform([K3])[0].dim == 9


def test_solver_on_triangle():
    q = QuboEncoder("MaxCut").fit_transform([K3])[0]
    solver = QAOASolver(budget=120, shots=2048, seed=3).fit(q)
    assert solver.score() > 1.5  # expectation below the uniform mean of -1.5
    x = solver.predict()
    best, mins = brute_force_minimum(q)
    assert tuple(x) in mins
    assert solver.probabilities().sum() == pytest.approx(1.0)
    assert 0 <= solver.probability_of("".join(map(str, x))) <= 1


def test_solver_accepts_arrays_and_rejects_non_square():
    solver = QAOASolver(budget=30).fit(np.array([[-1.0, 1.0], [1.0, -1.0]]))
    assert solver.qubo_.dim == 2
    with pytest.raises(ShapeError):
        QAOASolver().fit(np.zeros((2, 3)))
    with pytest.raises(InputError):
        QAOASolver(layers=0).fit(np.eye(2))


def test_solver_is_deterministic():
    q = qubo_maxcut(Graph.from_edges(K3))
    a = QAOASolver(budget=60, seed=5).fit(q)
    b = clone(a).fit(q)
    np.testing.assert_array_equal(a.gammas_, b.gammas_)
    assert a.sample().counts == b.sample().counts


def test_unfitted_estimators_raise():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        QAOASolver().predict()
    with pytest.raises(NotFittedError):
        DeviceRecommender().predict([sweep_circuit(4, 1)])


def test_device_recommender_picks_quantinuum():
    rec = DeviceRecommender().fit()
    assert rec.predict([sweep_circuit(12, 7)]) == ["quantinuum_h1_20"]
    winner, details = rec.score_devices(sweep_circuit(4, 7))
    assert len(details) == 9 and winner.eligible
    with pytest.raises(InputError):
        DeviceRecommender(weights=(1, 2)).fit()
