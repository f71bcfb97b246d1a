"""qbridge: problem documents to QUBO/arithmetic circuits, device scoring and reports."""

from __future__ import annotations

from .circuit import Circuit, Gate, bind, ising_from_qubo, qaoa_circuit
from .decode import Solution, best_of, decode_arithmetic, decode_bits
from .devices import DeviceProfile, load_catalog
from .dsl import Graph, ProblemFamily, ProblemSpec, canonical_graph, parse_spec, validate_spec
from .errors import QBridgeError
from .pipeline import RunConfig, run_file, run_spec
from .qubo import Qubo, brute_force_minimum, evaluate
from .recommender import Weights, recommend, sweep_maxcut
from .simulator import optimize_qaoa, sample, simulate
from .transpiler import transpile, verify_equivalence

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "DeviceProfile",
    "Gate",
    "Graph",
    "ProblemFamily",
    "ProblemSpec",
    "QBridgeError",
    "Qubo",
    "RunConfig",
    "Solution",
    "Weights",
    "best_of",
    "bind",
    "brute_force_minimum",
    "canonical_graph",
    "decode_arithmetic",
    "decode_bits",
    "evaluate",
    "ising_from_qubo",
    "load_catalog",
    "optimize_qaoa",
    "parse_spec",
    "qaoa_circuit",
    "recommend",
    "run_file",
    "run_spec",
    "sample",
    "simulate",
    "sweep_maxcut",
    "transpile",
    "validate_spec",
    "verify_equivalence",
]
