"""QUBO encodings for the optimization families plus an exhaustive minimizer.

Value convention everywhere: ``value(x) = x^T Q x + offset`` for a binary
vector ``x``, minimized.  ``Q`` is exactly symmetric; an off-diagonal
coefficient ``c`` on ``x_i x_j`` is stored as ``c/2`` in both ``Q[i, j]``
and ``Q[j, i]``.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable

import numpy as np

from .dsl import Graph
from .errors import DimensionError, InputError, PenaltyError, ShapeError, SizeError

MAX_BRUTE_FORCE_DIM = 24
DEFAULT_PENALTY = 2.0
DEFAULT_COLORING_PENALTY = 1.0


@dataclass(frozen=True, eq=False)
class Qubo:
    """Symmetric QUBO matrix with constant offset and per-variable labels."""

    q: np.ndarray
    offset: float
    labels: tuple[Hashable, ...]

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ShapeError(f"QUBO matrix must be square, got shape {q.shape}")
        if q.shape[0] != len(self.labels):
            raise ShapeError(f"{len(self.labels)} labels for a {q.shape[0]}x{q.shape[0]} matrix")
        if not np.all(np.isfinite(q)):
            raise ShapeError("QUBO matrix has non-finite entries")
        if not np.array_equal(q, q.T):
            raise ShapeError("QUBO matrix is not symmetric")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.q.shape[0]

    def index(self, label: Hashable) -> int:
        return self.labels.index(label)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "matrix": self.q.tolist(),
            "offset": self.offset,
            "labels": [list(lab) if isinstance(lab, tuple) else lab for lab in self.labels],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Qubo):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.offset == other.offset
            and np.array_equal(self.q, other.q)
        )

    def __repr__(self) -> str:
        return f"Qubo(dim={self.dim}, offset={self.offset})"


class _QuboBuilder:
    """Accumulates linear/quadratic terms over labelled variables."""

    def __init__(self, labels):
        self.labels = tuple(labels)
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        self.linear: dict[int, float] = defaultdict(float)
        self.quadratic: dict[tuple[int, int], float] = defaultdict(float)
        self.offset = 0.0

    def add_linear(self, label, coeff: float):
        self.linear[self._index[label]] += coeff

    def add_quadratic(self, a, b, coeff: float):
        i, j = self._index[a], self._index[b]
        if i == j:
            # x^2 = x for binary x
            self.linear[i] += coeff
        else:
            self.quadratic[(min(i, j), max(i, j))] += coeff

    def add_squared_linear(self, terms: list[tuple[Hashable, float]], constant: float, scale: float = 1.0):
        """Add ``scale * (constant + sum_k c_k x_k)^2`` expanded."""
        self.offset += scale * constant * constant
        for k, (lab, c) in enumerate(terms):
            # c^2 x^2 = c^2 x
            self.add_linear(lab, scale * (c * c + 2 * constant * c))
            for lab2, c2 in terms[k + 1:]:
                self.add_quadratic(lab, lab2, scale * 2 * c * c2)

    def build(self) -> Qubo:
        n = len(self.labels)
        q = np.zeros((n, n))
        for i, c in self.linear.items():
            q[i, i] += c
        for (i, j), c in self.quadratic.items():
            half = c / 2
            q[i, j] += half
            q[j, i] += half
        return Qubo(q, self.offset, self.labels)


def _check_penalty(penalty: float, floor: float = 1.0):
    if not (penalty > floor and math.isfinite(penalty)):
        raise PenaltyError(f"penalty must be > {floor}, got {penalty}")


def qubo_maxcut(g: Graph) -> Qubo:
    """MaxCut: ``value(x) = -cut(x)`` (weighted if the graph carries weights)."""
    b = _QuboBuilder(range(g.vertex_count))
    for idx, (u, v) in enumerate(g.edges):
        w = 1.0 if g.weights is None else g.weights[idx]
        # cut indicator x_u + x_v - 2 x_u x_v
        b.add_linear(u, -w)
        b.add_linear(v, -w)
        b.add_quadratic(u, v, 2 * w)
    return b.build()


def qubo_mis(g: Graph, penalty: float = DEFAULT_PENALTY) -> Qubo:
    """MIS: ``-sum x_i + penalty * sum_{(i,j) in E} x_i x_j``."""
    _check_penalty(penalty)
    b = _QuboBuilder(range(g.vertex_count))
    for v in range(g.vertex_count):
        b.add_linear(v, -1.0)
    for u, v in g.edges:
        b.add_quadratic(u, v, penalty)
    return b.build()


def qubo_vertex_cover(g: Graph, penalty: float = DEFAULT_PENALTY) -> Qubo:
    """Vertex cover: ``sum x_i + penalty * sum_{(i,j) in E} (1-x_i)(1-x_j)``."""
    _check_penalty(penalty)
    b = _QuboBuilder(range(g.vertex_count))
    for v in range(g.vertex_count):
        b.add_linear(v, 1.0)
    for u, v in g.edges:
        b.offset += penalty
        b.add_linear(u, -penalty)
        b.add_linear(v, -penalty)
        b.add_quadratic(u, v, penalty)
    return b.build()


def qubo_clique(g: Graph, penalty: float = DEFAULT_PENALTY) -> Qubo:
    """Maximum clique as MIS on the complement graph."""
    return qubo_mis(g.complement(), penalty)


def qubo_kcoloring(g: Graph, k: int, penalty: float = DEFAULT_COLORING_PENALTY) -> Qubo:
    """One-hot k-coloring; minimum 0 iff the graph is k-colorable.

    Variables are ``("x", v, c)`` at index ``v * k + c``.
    """
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    _check_penalty(penalty, floor=0.0)
    labels = [("x", v, c) for v in range(g.vertex_count) for c in range(k)]
    b = _QuboBuilder(labels)
    for v in range(g.vertex_count):
        b.add_squared_linear([(("x", v, c), -1.0) for c in range(k)], 1.0, penalty)
    for u, v in g.edges:
        for c in range(k):
            b.add_quadratic(("x", u, c), ("x", v, c), penalty)
    return b.build()


def default_tsp_penalty(g: Graph) -> float:
    max_w = max(g.weights) if g.weights else 1.0
    return g.vertex_count * max_w + 1.0


def qubo_tsp(g: Graph, penalty: float | None = None) -> Qubo:
    """Position-based TSP encoding.

    Variables are ``("x", v, t)`` (vertex ``v`` visited at position ``t``)
    at index ``v * n + t``.  The tour closes from position ``n-1`` back to 0.
    """
    n = g.vertex_count
    if n < 3:
        raise ShapeError(f"TSP needs at least 3 cities, got {n}")
    if not g.is_complete():
        raise ShapeError("TSP requires a complete graph")
    weights = g.weights or tuple(1.0 for _ in g.edges)
    max_w = max(weights)
    if penalty is None:
        penalty = default_tsp_penalty(g)
    if not (penalty > n * max_w):
        raise PenaltyError(f"TSP penalty must exceed n * max_weight = {n * max_w}, got {penalty}")

    labels = [("x", v, t) for v in range(n) for t in range(n)]
    b = _QuboBuilder(labels)
    for v in range(n):
        b.add_squared_linear([(("x", v, t), -1.0) for t in range(n)], 1.0, penalty)
    for t in range(n):
        b.add_squared_linear([(("x", v, t), -1.0) for v in range(n)], 1.0, penalty)
    for (u, v), w in zip(g.edges, weights):
        for t in range(n):
            nxt = (t + 1) % n
            b.add_quadratic(("x", u, t), ("x", v, nxt), w)
            b.add_quadratic(("x", v, t), ("x", u, nxt), w)
    return b.build()


def factor_register_width(n: int) -> int:
    """Free bits per factor register (bits above the fixed LSB).

    Both registers span ``[1, n // 3]`` so every non-trivial factor pair of
    an odd ``n`` is representable, while the trivial pair ``(1, n)`` never is.
    """
    return (n // 3).bit_length() - 1


def qubo_factor(n: int, penalty: float | None = None) -> Qubo:
    """Factor ``n = p * q`` with odd ``p``, ``q`` via ``(n - p q)^2``.

    ``p = 1 + sum_i 2^i p_i`` and ``q = 1 + sum_j 2^j q_j``.  Each product
    ``p_i q_j`` is replaced by an ancilla ``w_ij`` which a Rosenberg penalty
    ``M (p_i q_j - 2 p_i w_ij - 2 q_j w_ij + 3 w_ij)`` ties to the product.
    That makes the residual linear, so its square is quadratic.  The
    minimum value is 0 exactly when ``n`` has a representable factorization.
    """
    if n < 9 or n % 2 == 0:
        raise InputError(f"Factor requires odd n >= 9, got {n}")
    m = factor_register_width(n)
    if penalty is None:
        penalty = float(n * n)
    ps = [("p", i) for i in range(1, m + 1)]
    qs = [("q", j) for j in range(1, m + 1)]
    ws = [("w", i, j) for i in range(1, m + 1) for j in range(1, m + 1)]
    b = _QuboBuilder(ps + qs + ws)

    # n - pq = (n - 1) - sum 2^i p_i - sum 2^j q_j - sum 2^{i+j} w_ij
    residual = [(lab, -float(2 ** lab[1])) for lab in ps]
    residual += [(lab, -float(2 ** lab[1])) for lab in qs]
    residual += [(lab, -float(2 ** (lab[1] + lab[2]))) for lab in ws]
    b.add_squared_linear(residual, float(n - 1))

    for i in range(1, m + 1):
        for j in range(1, m + 1):
            w = ("w", i, j)
            b.add_quadratic(("p", i), ("q", j), penalty)
            b.add_quadratic(("p", i), w, -2 * penalty)
            b.add_quadratic(("q", j), w, -2 * penalty)
            b.add_linear(w, 3 * penalty)
    return b.build()


def factor_values(q: Qubo, bits) -> tuple[int, int]:
    """Decode ``(p, q)`` from an assignment of a :func:`qubo_factor` QUBO."""
    p_val, q_val = 1, 1
    for i, lab in enumerate(q.labels):
        if bits[i] and lab[0] == "p":
            p_val += 2 ** lab[1]
        elif bits[i] and lab[0] == "q":
            q_val += 2 ** lab[1]
    return p_val, q_val


def _as_bits(x, dim: int) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1 or x.shape[0] != dim:
        raise DimensionError(f"assignment of length {x.shape[0] if x.ndim == 1 else x.shape} for a dim-{dim} QUBO")
    if not np.all((x == 0) | (x == 1)):
        raise DimensionError("assignment entries must be 0 or 1")
    return x.astype(float)


def evaluate(q: Qubo, x) -> float:
    """Return ``x^T Q x + offset``."""
    v = _as_bits(x, q.dim)
    return float(v @ q.q @ v) + q.offset


def basis_values(q: Qubo) -> np.ndarray:
    """QUBO value of every basis index (bit ``i`` of the index is ``x_i``)."""
    n = q.dim
    total = 2**n
    values = np.empty(total)
    chunk = min(total, 1 << 16)
    shifts = np.arange(n, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        x = ((idx[:, None] >> shifts) & 1).astype(float)
        values[start:start + len(idx)] = ((x @ q.q) * x).sum(axis=1) + q.offset
    return values


def index_to_bits(index: int, dim: int) -> tuple[int, ...]:
    return tuple((index >> i) & 1 for i in range(dim))


def bits_to_index(bits) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


def brute_force_minimum(q: Qubo, tol: float = 1e-9) -> tuple[float, list[tuple[int, ...]]]:
    """Exhaustive minimum and every minimizing assignment (sorted).

    Assignments within ``tol * max(1, |min|)`` of the minimum count as ties.
    """
    if q.dim > MAX_BRUTE_FORCE_DIM:
        raise SizeError(f"brute force is capped at {MAX_BRUTE_FORCE_DIM} variables, got {q.dim}")
    values = basis_values(q)
    best = float(values.min())
    hits = np.flatnonzero(values <= best + tol * max(1.0, abs(best)))
    minimizers = sorted(index_to_bits(int(i), q.dim) for i in hits)
    return best, minimizers
