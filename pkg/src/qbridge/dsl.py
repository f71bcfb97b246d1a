"""JSON problem DSL: parsing, validation and graph canonicalization.

A problem document looks like::

    {
      "family": "MIS",
      "goal": "find a maximum independent set of the graph",
      "description": "Minimal MIS example",
      "instance": {
        "graph_rep": "edge_list",
        "graphs": {"G1": [[0, 1], [1, 2], [2, 3]]}
      }
    }

Graph families carry ``graph_rep`` plus named ``graphs`` and optionally
``vertex_count``, ``weights`` (TSP, weighted MaxCut) and ``k`` (KColoring).
``Factor`` carries ``n``; ``ADD``/``SUB``/``MUL`` carry ``a``, ``b`` and
optionally ``bit_width`` (default: the width of the larger operand).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Union

import numpy as np

from .errors import SchemaError, ShapeError, SpecSyntaxError


class ProblemFamily(str, Enum):
    MAXCUT = "MaxCut"
    MIS = "MIS"
    TSP = "TSP"
    CLIQUE = "Clique"
    KCOLORING = "KColoring"
    VERTEX_COVER = "VertexCover"
    FACTOR = "Factor"
    ADD = "ADD"
    SUB = "SUB"
    MUL = "MUL"

    @property
    def is_graph(self) -> bool:
        return self in GRAPH_FAMILIES

    @property
    def is_arithmetic(self) -> bool:
        return self in ARITHMETIC_FAMILIES


GRAPH_FAMILIES = frozenset(
    {
        ProblemFamily.MAXCUT,
        ProblemFamily.MIS,
        ProblemFamily.TSP,
        ProblemFamily.CLIQUE,
        ProblemFamily.KCOLORING,
        ProblemFamily.VERTEX_COVER,
    }
)
ARITHMETIC_FAMILIES = frozenset({ProblemFamily.ADD, ProblemFamily.SUB, ProblemFamily.MUL})
QUBO_FAMILIES = GRAPH_FAMILIES | {ProblemFamily.FACTOR}

GRAPH_REPS = ("edge_list", "adjacency_matrix")
MAX_ARITHMETIC_BITS = {ProblemFamily.ADD: 8, ProblemFamily.SUB: 8, ProblemFamily.MUL: 3}

_TOP_KEYS = {"family", "goal", "description", "instance"}
_GRAPH_KEYS = {"graph_rep", "graphs", "vertex_count", "weights", "k"}
_FACTOR_KEYS = {"n"}
_ARITH_KEYS = {"a", "b", "bit_width"}


@dataclass(frozen=True)
class GraphInstance:
    """Graph payload exactly as written in the document.

    ``graphs`` and ``weights`` are name-sorted tuples of ``(name, value)``
    pairs; values hold edge pairs or matrix rows as nested tuples.
    """

    graph_rep: str
    graphs: tuple[tuple[str, tuple], ...]
    vertex_count: int | tuple[tuple[str, int], ...] | None = None
    weights: tuple[tuple[str, tuple], ...] | None = None
    k: int | None = None

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.graphs]

    def graph_data(self, name: str) -> tuple:
        return dict(self.graphs)[name]

    def weights_for(self, name: str) -> tuple | None:
        if self.weights is None:
            return None
        return dict(self.weights).get(name)

    def vertex_count_for(self, name: str) -> int | None:
        if self.vertex_count is None or isinstance(self.vertex_count, int):
            return self.vertex_count
        return dict(self.vertex_count).get(name)


@dataclass(frozen=True)
class FactorInstance:
    n: int


@dataclass(frozen=True)
class ArithmeticInstance:
    a: int
    b: int
    bits: int


InstancePayload = Union[GraphInstance, FactorInstance, ArithmeticInstance]


@dataclass(frozen=True)
class ProblemSpec:
    family: ProblemFamily
    instance: InstancePayload
    goal: str = ""
    description: str = ""


@dataclass(frozen=True)
class Graph:
    """Canonical undirected simple graph over vertices ``0..vertex_count-1``.

    ``edges`` is sorted with ``u < v`` in every pair; ``weights`` (if any) is
    aligned with ``edges``.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...] | None = None
    # document vertex id of each dense vertex, set only when ids were re-indexed
    original_ids: tuple[int, ...] | None = None

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < v < self.vertex_count):
                raise ShapeError(f"edge ({u}, {v}) is not canonical for {self.vertex_count} vertices")
            if (u, v) in seen:
                raise ShapeError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
        if self.weights is not None and len(self.weights) != len(self.edges):
            raise ShapeError("weights must align with edges")

    @classmethod
    def from_edges(cls, edges, vertex_count: int | None = None, weights=None) -> "Graph":
        """Build a canonical graph from arbitrary (possibly repeated) pairs."""
        merged: dict[tuple[int, int], float | None] = {}
        for i, (u, v) in enumerate(edges):
            u, v = int(u), int(v)
            if u == v:
                raise ShapeError(f"self-loop on vertex {u}")
            key = (min(u, v), max(u, v))
            w = None if weights is None else float(weights[i])
            if key in merged and merged[key] != w:
                raise ShapeError(f"conflicting weights for edge {key}")
            merged[key] = w
        top = max((v for _, v in merged), default=-1) + 1
        if vertex_count is None:
            vertex_count = top
        elif vertex_count < top:
            raise ShapeError(f"vertex_count {vertex_count} is smaller than max endpoint + 1 = {top}")
        ordered = sorted(merged)
        w = None if weights is None else tuple(merged[e] for e in ordered)
        return cls(vertex_count, tuple(ordered), w)

    @property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edge_set

    def weight(self, u: int, v: int) -> float:
        key = (min(u, v), max(u, v))
        if self.weights is None:
            if key not in self.edge_set:
                raise KeyError(key)
            return 1.0
        return dict(zip(self.edges, self.weights))[key]

    def is_complete(self) -> bool:
        n = self.vertex_count
        return len(self.edges) == n * (n - 1) // 2

    def complement(self) -> "Graph":
        present = self.edge_set
        n = self.vertex_count
        missing = tuple((u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in present)
        return Graph(n, missing)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.vertex_count, self.vertex_count), dtype=int)
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1
        return a


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


# -- parsing -----------------------------------------------------------------


def _reject_constant(token: str):
    raise ValueError(f"non-finite number {token!r}")


def _finite_float(token: str) -> float:
    value = float(token)
    if not math.isfinite(value):
        raise ValueError(f"non-finite number {token!r}")
    return value


def _load_json(text: str | bytes) -> Any:
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SpecSyntaxError(f"input is not valid UTF-8 ({exc.reason})") from None
    if not isinstance(text, str):
        raise SpecSyntaxError(f"expected str or bytes, got {type(text).__name__}")
    try:
        return json.loads(text, parse_constant=_reject_constant, parse_float=_finite_float)
    except RecursionError:
        raise SpecSyntaxError("document nests too deeply") from None
    except (ValueError, TypeError) as exc:
        # json.JSONDecodeError is a ValueError subclass
        raise SpecSyntaxError(f"malformed JSON: {exc}") from None


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return (isinstance(value, (int, float)) and not isinstance(value, bool)) and math.isfinite(value)


def _expect_int(value: Any, path: str) -> int:
    if not _is_int(value):
        raise SchemaError(f"expected an integer, got {type(value).__name__}", path)
    return value


def _expect_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"expected a string, got {type(value).__name__}", path)
    return value


def _expect_object(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"expected an object, got {type(value).__name__}", path)
    return value


def _expect_list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(f"expected an array, got {type(value).__name__}", path)
    return value


def _parse_edge_list(value: Any, path: str) -> tuple:
    edges = []
    for i, pair in enumerate(_expect_list(value, path)):
        p = f"{path}[{i}]"
        pair = _expect_list(pair, p)
        if len(pair) != 2:
            raise SchemaError(f"an edge has exactly 2 endpoints, got {len(pair)}", p)
        u = _expect_int(pair[0], f"{p}[0]")
        v = _expect_int(pair[1], f"{p}[1]")
        if u < 0 or v < 0:
            raise SchemaError("vertex ids must be non-negative", p)
        edges.append((u, v))
    return tuple(edges)


def _parse_matrix(value: Any, path: str, *, binary: bool) -> tuple:
    rows = []
    for i, row in enumerate(_expect_list(value, path)):
        p = f"{path}[{i}]"
        cells = []
        for j, cell in enumerate(_expect_list(row, p)):
            if binary:
                if not _is_int(cell) or cell not in (0, 1):
                    raise SchemaError("adjacency entries must be 0 or 1", f"{p}[{j}]")
            elif not _is_number(cell):
                raise SchemaError("expected a finite number", f"{p}[{j}]")
            cells.append(cell)
        rows.append(tuple(cells))
    return tuple(rows)


def _parse_name_map(value: Any, path: str, parse_item) -> tuple[tuple[str, Any], ...]:
    obj = _expect_object(value, path)
    return tuple((name, parse_item(obj[name], f"{path}.{name}")) for name in sorted(obj))


def _parse_weight_vector(value: Any, path: str) -> tuple:
    out = []
    for i, w in enumerate(_expect_list(value, path)):
        if not _is_number(w):
            raise SchemaError("expected a finite number", f"{path}[{i}]")
        out.append(w)
    return tuple(out)


def _parse_graph_instance(obj: dict, path: str) -> GraphInstance:
    if "graph_rep" not in obj:
        raise SchemaError("missing required field", f"{path}.graph_rep")
    rep = _expect_str(obj["graph_rep"], f"{path}.graph_rep")
    if rep not in GRAPH_REPS:
        raise SchemaError(f"unknown graph_rep {rep!r}; expected one of {list(GRAPH_REPS)}", f"{path}.graph_rep")
    if "graphs" not in obj:
        raise SchemaError("missing required field", f"{path}.graphs")
    if rep == "edge_list":
        graphs = _parse_name_map(obj["graphs"], f"{path}.graphs", _parse_edge_list)
    else:
        graphs = _parse_name_map(
            obj["graphs"], f"{path}.graphs", lambda v, p: _parse_matrix(v, p, binary=True)
        )

    vertex_count = None
    if "vertex_count" in obj:
        raw = obj["vertex_count"]
        if isinstance(raw, dict):
            vertex_count = _parse_name_map(raw, f"{path}.vertex_count", _expect_int)
        else:
            vertex_count = _expect_int(raw, f"{path}.vertex_count")

    weights = None
    if "weights" in obj:
        if rep == "edge_list":
            weights = _parse_name_map(obj["weights"], f"{path}.weights", _parse_weight_vector)
        else:
            weights = _parse_name_map(
                obj["weights"], f"{path}.weights", lambda v, p: _parse_matrix(v, p, binary=False)
            )

    k = _expect_int(obj["k"], f"{path}.k") if "k" in obj else None
    return GraphInstance(rep, graphs, vertex_count, weights, k)


def _parse_instance(value: Any, path: str) -> InstancePayload:
    obj = _expect_object(value, path)
    keys = set(obj)
    unknown = keys - (_GRAPH_KEYS | _FACTOR_KEYS | _ARITH_KEYS)
    if unknown:
        raise SchemaError("unknown field", f"{path}.{sorted(unknown)[0]}")
    kinds = [name for name, ks in (("graph", _GRAPH_KEYS), ("factor", _FACTOR_KEYS), ("arithmetic", _ARITH_KEYS)) if keys & ks]
    if len(kinds) > 1:
        raise SchemaError(f"instance mixes {' and '.join(kinds)} fields", path)
    if not kinds:
        raise SchemaError("instance has no payload fields", path)
    if kinds[0] == "graph":
        return _parse_graph_instance(obj, path)
    if kinds[0] == "factor":
        return FactorInstance(_expect_int(obj["n"], f"{path}.n"))
    for key in ("a", "b"):
        if key not in obj:
            raise SchemaError("missing required field", f"{path}.{key}")
    a = _expect_int(obj["a"], f"{path}.a")
    b = _expect_int(obj["b"], f"{path}.b")
    if "bit_width" in obj:
        bits = _expect_int(obj["bit_width"], f"{path}.bit_width")
    else:
        bits = max(1, abs(a).bit_length(), abs(b).bit_length())
    return ArithmeticInstance(a, b, bits)


def parse_spec(text: str | bytes) -> ProblemSpec:
    """Parse a DSL document into a :class:`ProblemSpec`.

    Raises :class:`SpecSyntaxError` for anything that is not UTF-8 JSON and
    :class:`SchemaError` (carrying a JSON path) for structural problems.
    Semantic consistency is checked separately by :func:`validate_spec`.
    """
    doc = _load_json(text)
    obj = _expect_object(doc, "$")
    unknown = set(obj) - _TOP_KEYS
    if unknown:
        raise SchemaError("unknown top-level field", f"$.{sorted(unknown)[0]}")
    if "family" not in obj:
        raise SchemaError("missing required field", "$.family")
    raw_family = _expect_str(obj["family"], "$.family")
    try:
        family = ProblemFamily(raw_family)
    except ValueError:
        choices = ", ".join(f.value for f in ProblemFamily)
        raise SchemaError(f"unknown family {raw_family!r}; expected one of {choices}", "$.family") from None
    goal = _expect_str(obj.get("goal", ""), "$.goal")
    description = _expect_str(obj.get("description", ""), "$.description")
    if "instance" not in obj:
        raise SchemaError("missing required field", "$.instance")
    instance = _parse_instance(obj["instance"], "$.instance")
    return ProblemSpec(family, instance, goal, description)


def spec_to_dict(spec: ProblemSpec) -> dict:
    inst = spec.instance
    if isinstance(inst, GraphInstance):
        payload: dict[str, Any] = {
            "graph_rep": inst.graph_rep,
            "graphs": {name: [list(row) for row in data] for name, data in inst.graphs},
        }
        if inst.vertex_count is not None:
            payload["vertex_count"] = (
                inst.vertex_count if isinstance(inst.vertex_count, int) else dict(inst.vertex_count)
            )
        if inst.weights is not None:
            payload["weights"] = {
                name: [list(r) if isinstance(r, tuple) else r for r in data] for name, data in inst.weights
            }
        if inst.k is not None:
            payload["k"] = inst.k
    elif isinstance(inst, FactorInstance):
        payload = {"n": inst.n}
    else:
        payload = {"a": inst.a, "b": inst.b, "bit_width": inst.bits}
    return {
        "family": spec.family.value,
        "goal": spec.goal,
        "description": spec.description,
        "instance": payload,
    }


def dump_spec(spec: ProblemSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2, sort_keys=True)


# -- validation --------------------------------------------------------------


def _matrix_problems(name: str, m: tuple, what: str) -> list[str]:
    n = len(m)
    if any(len(row) != n for row in m):
        return [f"{what} of graph {name!r} is not square"]
    problems = []
    if any(m[i][i] != 0 for i in range(n)):
        problems.append(f"{what} of graph {name!r} has a non-zero diagonal")
    if any(m[i][j] != m[j][i] for i in range(n) for j in range(i + 1, n)):
        problems.append(f"{what} of graph {name!r} is not symmetric")
    return problems


def _graph_violations(spec: ProblemSpec, inst: GraphInstance) -> list[str]:
    family = spec.family
    out: list[str] = []
    if not inst.graphs:
        out.append("instance.graphs must name at least one graph")
    if isinstance(inst.vertex_count, tuple):
        extra = {n for n, _ in inst.vertex_count} - set(inst.names)
        if extra:
            out.append(f"vertex_count names unknown graph {sorted(extra)[0]!r}")
    if inst.weights is not None:
        if family not in (ProblemFamily.TSP, ProblemFamily.MAXCUT):
            out.append(f"{family.value} does not take edge weights")
        extra = {n for n, _ in inst.weights} - set(inst.names)
        if extra:
            out.append(f"weights name unknown graph {sorted(extra)[0]!r}")
    if family is ProblemFamily.KCOLORING:
        if inst.k is None:
            out.append("KColoring requires k")
        elif inst.k < 1:
            out.append("KColoring requires k >= 1")
    elif inst.k is not None:
        out.append(f"{family.value} does not take k")

    for name, data in inst.graphs:
        count = inst.vertex_count_for(name)
        if count is not None and count < 0:
            out.append(f"vertex_count of graph {name!r} is negative")
            continue
        weights = inst.weights_for(name)
        shape_ok = True
        if inst.graph_rep == "edge_list":
            for u, v in data:
                if u == v:
                    out.append(f"graph {name!r} has a self-loop on vertex {u}")
                    shape_ok = False
                elif count is not None and max(u, v) >= count:
                    out.append(f"graph {name!r} edge ({u}, {v}) exceeds vertex_count {count}")
                    shape_ok = False
            if weights is not None:
                if len(weights) != len(data):
                    out.append(f"weights of graph {name!r} must have one entry per edge")
                    shape_ok = False
                elif any(w < 0 for w in weights):
                    out.append(f"weights of graph {name!r} must be non-negative")
        else:
            problems = _matrix_problems(name, data, "adjacency matrix")
            if count is not None and count != len(data):
                problems.append(f"vertex_count of graph {name!r} disagrees with its matrix size")
            if weights is not None:
                if len(weights) != len(data):
                    problems.append(f"weight matrix of graph {name!r} has the wrong size")
                else:
                    problems += _matrix_problems(name, weights, "weight matrix")
                    if any(w < 0 for row in weights for w in row):
                        problems.append(f"weights of graph {name!r} must be non-negative")
            out += problems
            shape_ok = not problems
        if not shape_ok:
            continue
        try:
            g = canonical_graph(inst, name)
        except ShapeError as exc:
            out.append(f"graph {name!r}: {exc}")
            continue
        if g.vertex_count == 0:
            out.append(f"graph {name!r} has no vertices")
        if family is ProblemFamily.TSP:
            if weights is None:
                out.append("TSP requires edge weights")
            if g.vertex_count < 3:
                out.append(f"TSP graph {name!r} needs at least 3 vertices")
            elif not g.is_complete():
                out.append(f"TSP graph {name!r} must be complete")
    return out


def validate_spec(spec: ProblemSpec) -> ValidationReport:
    """Check family/payload consistency and value constraints.

    Never raises; every problem found is returned as a violation string.
    """
    family, inst = spec.family, spec.instance
    violations: list[str] = []
    if family.is_graph:
        if not isinstance(inst, GraphInstance):
            violations.append(f"{family.value} requires a graph instance")
        else:
            violations += _graph_violations(spec, inst)
    elif family is ProblemFamily.FACTOR:
        if not isinstance(inst, FactorInstance):
            violations.append("Factor requires instance.n")
        elif inst.n < 9 or inst.n % 2 == 0:
            violations.append("Factor requires odd n ≥ 9")
    else:
        if not isinstance(inst, ArithmeticInstance):
            violations.append(f"{family.value} requires instance.a, instance.b and instance.bit_width")
        else:
            cap = MAX_ARITHMETIC_BITS[family]
            if inst.bits < 1:
                violations.append(f"{family.value} requires bit_width ≥ 1")
            elif inst.bits > cap:
                violations.append(f"{family.value} supports at most {cap} bits")
            if inst.a < 0 or inst.b < 0:
                violations.append(f"{family.value} operands must be non-negative")
            elif inst.bits >= 1 and max(inst.a, inst.b) >= 2**inst.bits:
                violations.append(f"{family.value} operands must fit in {inst.bits} bits")
    return ValidationReport(violations)


# -- canonicalization --------------------------------------------------------


def canonical_graph(payload: GraphInstance, name: str | None = None) -> Graph:
    """Return the canonical :class:`Graph` for one named graph of ``payload``.

    ``name`` may be omitted when the payload holds exactly one graph.
    """
    if name is None:
        if len(payload.graphs) != 1:
            raise ShapeError(f"payload holds {len(payload.graphs)} graphs; pass a name")
        name = payload.graphs[0][0]
    data = payload.graph_data(name)
    weights = payload.weights_for(name)
    count = payload.vertex_count_for(name)
    if payload.graph_rep == "edge_list":
        used = sorted({int(x) for pair in data for x in pair})
        if count is None and used != list(range(len(used))):
            # sparse ids: re-index densely and keep the mapping
            dense = {v: i for i, v in enumerate(used)}
            relabelled = [(dense[int(u)], dense[int(v)]) for u, v in data]
            g = Graph.from_edges(relabelled, len(used), weights)
            return Graph(g.vertex_count, g.edges, g.weights, tuple(used))
        return Graph.from_edges(data, count, weights)

    n = len(data)
    if any(len(row) != n for row in data):
        raise ShapeError(f"adjacency matrix of graph {name!r} is not square")
    if count is not None and count != n:
        raise ShapeError(f"vertex_count {count} disagrees with {n}x{n} adjacency matrix")
    edges, ws = [], []
    for i in range(n):
        if data[i][i] != 0:
            raise ShapeError(f"adjacency matrix of graph {name!r} has a non-zero diagonal")
        for j in range(i + 1, n):
            if data[i][j] != data[j][i]:
                raise ShapeError(f"adjacency matrix of graph {name!r} is not symmetric")
            if data[i][j]:
                edges.append((i, j))
                if weights is not None:
                    if weights[i][j] != weights[j][i]:
                        raise ShapeError(f"weight matrix of graph {name!r} is not symmetric")
                    ws.append(weights[i][j])
    return Graph.from_edges(edges, n, ws if weights is not None else None)


def canonical_graphs(payload: GraphInstance) -> list[tuple[str, Graph]]:
    """All named graphs of ``payload`` in name-sorted order."""
    return [(name, canonical_graph(payload, name)) for name in payload.names]
