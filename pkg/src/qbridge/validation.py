"""Input validation helpers for the estimator layer."""

from __future__ import annotations

from typing import Any

import numpy as np
from sklearn.utils import check_array

from .circuit import Circuit
from .errors import DimensionError, InputError, ShapeError
from .qubo import Qubo
from .recommender import Weights


def check_qubo(X: Any, offset: float = 0.0) -> Qubo:
    """Accept a :class:`Qubo` or a square array-like (symmetrized if needed)."""
    if isinstance(X, Qubo):
        return X
    m = check_array(X, dtype=float, ensure_2d=True, ensure_all_finite=True)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"QUBO matrix must be square, got {m.shape}")
    return Qubo((m + m.T) / 2, offset, tuple(range(m.shape[0])))


def check_bits(x: Any, dim: int) -> np.ndarray:
    v = np.asarray(x)
    if v.ndim != 1 or v.shape[0] != dim:
        raise DimensionError(f"expected {dim} bits, got shape {v.shape}")
    if not np.isin(v, (0, 1)).all():
        raise DimensionError("bits must be 0 or 1")
    return v.astype(int)


def check_weights(w: Any) -> Weights:
    if isinstance(w, Weights):
        return w
    if isinstance(w, str):
        return Weights.parse(w)
    values = tuple(float(v) for v in w)
    if len(values) != 3:
        raise InputError(f"weights need three values, got {len(values)}")
    return Weights(*values)


def check_circuit(c: Any) -> Circuit:
    if not isinstance(c, Circuit):
        raise InputError(f"expected a Circuit, got {type(c).__name__}")
    if not c.is_executable:
        raise InputError("circuit has unbound parameters")
    return c


def check_positive_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise InputError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
