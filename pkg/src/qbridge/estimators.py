"""scikit-learn shaped wrappers around the encoding, QAOA and scoring stages.

Hyperparameters live in ``__init__`` (so ``get_params``/``set_params`` and
``clone`` work); learned state ends in an underscore.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .circuit import Circuit, bind, qaoa_circuit, qaoa_values
from .devices import load_catalog
from .dsl import Graph, ProblemFamily
from .encode import encode_graph
from .errors import InputError
from .qubo import Qubo, evaluate
from .recommender import recommend
from .simulator import Histogram, bitstring_to_index, optimize_qaoa, sample, simulate
from .validation import check_circuit, check_positive_int, check_qubo, check_weights


class QuboEncoder(TransformerMixin, BaseEstimator):
    """Graphs (or edge lists) to QUBOs for one graph family."""

    def __init__(self, family: str = "MaxCut", penalty: float | None = None, k: int | None = None):
        self.family = family
        self.penalty = penalty
        self.k = k

    def fit(self, X=None, y=None):
        fam = ProblemFamily(self.family)
        if not fam.is_graph:
            raise InputError(f"{fam.value} is not a graph family")
        if fam is ProblemFamily.KCOLORING and self.k is None:
            raise InputError("KColoring needs k")
        self.family_ = fam
        return self

    def transform(self, X: Sequence[Graph | Sequence[Sequence[int]]]) -> list[Qubo]:
        check_is_fitted(self, "family_")
        graphs = [g if isinstance(g, Graph) else Graph.from_edges(g) for g in X]
        return [encode_graph(self.family_, g, self.k, self.penalty) for g in graphs]


class QAOASolver(BaseEstimator):
    """Fit QAOA angles to one QUBO; predict the lowest-value sampled assignment."""

    def __init__(self, layers: int = 1, shots: int = 4096, budget: int = 200, seed: int = 7):
        self.layers = layers
        self.shots = shots
        self.budget = budget
        self.seed = seed

    def fit(self, X, y=None):
        q = check_qubo(X)
        layers = check_positive_int(self.layers, "layers")
        budget = check_positive_int(self.budget, "budget")
        result = optimize_qaoa(q, layers, budget, self.seed)
        gammas, betas = result.best_params
        self.qubo_ = q
        self.gammas_, self.betas_ = np.array(gammas), np.array(betas)
        self.expectation_ = result.best_expectation
        self.n_evaluations_ = result.evaluations
        self.circuit_ = bind(qaoa_circuit(q, layers), qaoa_values(gammas, betas))
        return self

    def sample(self, shots: int | None = None, seed: int | None = None) -> Histogram:
        check_is_fitted(self, "circuit_")
        shots = check_positive_int(shots if shots is not None else self.shots, "shots")
        return sample(simulate(self.circuit_), shots, self.seed if seed is None else seed)

    def predict(self, X=None) -> np.ndarray:
        """Sampled assignment with the lowest QUBO value (ties: more counts)."""
        hist = self.sample()
        best = min(
            hist.most_common(),
            key=lambda kv: (evaluate(self.qubo_, [int(c) for c in kv[0]]), -kv[1], kv[0]),
        )[0]
        return np.array([int(c) for c in best])

    def score(self, X=None, y=None) -> float:
        """Negated optimized expectation (higher is better, sklearn style)."""
        check_is_fitted(self, "expectation_")
        return -self.expectation_

    def probabilities(self) -> np.ndarray:
        check_is_fitted(self, "circuit_")
        return simulate(self.circuit_).probabilities()

    def probability_of(self, bitstring: str) -> float:
        return float(self.probabilities()[bitstring_to_index(bitstring)])


class DeviceRecommender(BaseEstimator):
    """Pick a device per circuit under weighted error/time/cost scoring."""

    def __init__(self, weights=(0.5, 0.25, 0.25), shots: int = 4096, catalog: str | None = None):
        self.weights = weights
        self.shots = shots
        self.catalog = catalog

    def fit(self, X=None, y=None):
        self.weights_ = check_weights(self.weights)
        self.shots_ = check_positive_int(self.shots, "shots")
        self.catalog_ = load_catalog(self.catalog)
        return self

    def score_devices(self, c: Circuit):
        check_is_fitted(self, "catalog_")
        return recommend(check_circuit(c), self.catalog_, self.weights_, self.shots_)

    def predict(self, X: Sequence[Circuit]) -> list[str]:
        return [self.score_devices(c)[0].device for c in X]
