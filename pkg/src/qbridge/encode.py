"""Turn a validated problem document into per-graph encoded tasks."""

from __future__ import annotations

from dataclasses import dataclass

from .dsl import (
    ArithmeticInstance,
    FactorInstance,
    Graph,
    GraphInstance,
    ProblemFamily,
    ProblemSpec,
    canonical_graphs,
)
from .qubo import (
    Qubo,
    qubo_clique,
    qubo_factor,
    qubo_kcoloring,
    qubo_maxcut,
    qubo_mis,
    qubo_tsp,
    qubo_vertex_cover,
)


@dataclass(frozen=True)
class EncodedProblem:
    """One runnable task: a QUBO (optimization families) or an arithmetic job."""

    family: ProblemFamily
    graph_name: str | None = None
    qubo: Qubo | None = None
    graph: Graph | None = None
    k: int | None = None
    n: int | None = None
    arithmetic: ArithmeticInstance | None = None

    @property
    def is_arithmetic(self) -> bool:
        return self.arithmetic is not None


def encode_graph(family: ProblemFamily, g: Graph, k: int | None = None, penalty: float | None = None) -> Qubo:
    kw = {} if penalty is None else {"penalty": penalty}
    if family is ProblemFamily.MAXCUT:
        return qubo_maxcut(g)
    if family is ProblemFamily.MIS:
        return qubo_mis(g, **kw)
    if family is ProblemFamily.CLIQUE:
        return qubo_clique(g, **kw)
    if family is ProblemFamily.VERTEX_COVER:
        return qubo_vertex_cover(g, **kw)
    if family is ProblemFamily.KCOLORING:
        return qubo_kcoloring(g, k, **kw)
    if family is ProblemFamily.TSP:
        return qubo_tsp(g, **kw)
    raise ValueError(f"{family.value} is not a graph family")


def encode_spec(spec: ProblemSpec, penalty: float | None = None) -> list[EncodedProblem]:
    """Encode every graph of ``spec`` (sorted by name), or its single task."""
    fam = spec.family
    inst = spec.instance
    if isinstance(inst, GraphInstance):
        k = inst.k if fam is ProblemFamily.KCOLORING else None
        return [
            EncodedProblem(fam, name, encode_graph(fam, g, k, penalty), g, k=k)
            for name, g in canonical_graphs(inst)
        ]
    if isinstance(inst, FactorInstance):
        kw = {} if penalty is None else {"penalty": penalty}
        return [EncodedProblem(fam, qubo=qubo_factor(inst.n, **kw), n=inst.n)]
    if isinstance(inst, ArithmeticInstance):
        return [EncodedProblem(fam, arithmetic=inst)]
    raise TypeError(f"unsupported instance payload {type(inst).__name__}")
