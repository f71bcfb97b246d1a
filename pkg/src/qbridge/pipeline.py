"""End-to-end runs: parse, validate, encode, build, recommend, simulate, decode, report."""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .arithmetic import (
    adder_circuit,
    classical_result,
    input_bits,
    multiplier_circuit,
    subtractor_circuit,
)
from .circuit import Circuit, bind, qaoa_circuit, qaoa_values
from .decode import Solution, approximation_ratio, best_of, decode_arithmetic, decode_bits, headline
from .devices import DeviceProfile, load_catalog
from .dsl import ProblemFamily, ProblemSpec, parse_spec, validate_spec
from .encode import EncodedProblem, encode_spec
from .errors import (
    InputError,
    PenaltyError,
    QBridgeError,
    SchemaError,
    ShapeError,
    SizeError,
    SpecError,
)
from .qubo import MAX_BRUTE_FORCE_DIM, brute_force_minimum
from .recommender import Weights, recommend
from .report import RunReport, emit_report, write_summary
from .simulator import MAX_SIM_QUBITS, StateVector, optimize_qaoa, sample, simulate

log = logging.getLogger(__name__)

TOP_OUTCOMES = 10
# Errors caused by the input document rather than by this package.
VALIDATION_ERRORS = (SpecError, PenaltyError, ShapeError, InputError, SizeError)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 7
    shots: int = 4096
    layers: int = 1
    weights: Weights = field(default_factory=Weights)
    penalty: float | None = None
    catalog: str | None = None
    budget: int = 200

    def __post_init__(self):
        if self.shots < 1:
            raise InputError(f"shots must be >= 1, got {self.shots}")
        if self.layers < 1:
            raise InputError(f"layers must be >= 1, got {self.layers}")
        if self.budget < 1:
            raise InputError(f"budget must be >= 1, got {self.budget}")


def instance_seed(root_seed: int, name: str) -> int:
    """Per-instance seed from ``(root seed, instance name)``; order-independent."""
    digest = hashlib.sha256(f"{root_seed}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "little") & ((1 << 63) - 1)


def instance_name(stem: str, graph_name: str | None, graph_count: int) -> str:
    return stem if graph_name is None or graph_count == 1 else f"{stem}_{graph_name}"


# -- report sections ------------------------------------------------------------


def _spec_section(spec: ProblemSpec) -> dict:
    return {"family": spec.family.value, "goal": spec.goal, "description": spec.description}


def _circuit_section(c: Circuit, kind: str, layers: int | None = None) -> dict:
    out = {"kind": kind, "qubits": c.qubit_count, "depth": c.depth(), "gate_counts": c.gate_counts()}
    if layers is not None:
        out["layers"] = layers
    return out


def _recommendation_section(c: Circuit, catalog: Sequence[DeviceProfile], config: RunConfig) -> tuple[dict, float]:
    winner, details = recommend(c, catalog, config.weights, config.shots)
    section = {
        "winner": winner.device,
        "provider": winner.provider,
        "score": winner.total,
        "weights": list(config.weights.normalized()),
        "shots": config.shots,
        "details": [d.to_dict() for d in details],
    }
    return section, winner.raw_time


def _execution_section(hist, seed: int) -> dict:
    return {
        "backend": "statevector",
        "shots": hist.shots,
        "seed": seed,
        "distinct_outcomes": len(hist.counts),
        "top_outcomes": [{"bitstring": b, "count": n} for b, n in hist.most_common(TOP_OUTCOMES)],
    }


def _article(n: int) -> str:
    # spoken "eight", "eleven", "eighteen", "eighty..." take "an"
    s = str(n)
    return "an" if s.startswith("8") or s in ("11", "18") else "a"


def _qubo_summary(dim: int, circuit_qubits: int, layers: int) -> str:
    return (
        f"{dim}x{dim} QUBO matrix and {_article(circuit_qubits)} {circuit_qubits}-qubit QAOA circuit "
        f"({layers} layer{'s' if layers != 1 else ''})"
    )


def _quality(task: EncodedProblem, sol: Solution, hist) -> dict:
    q = task.qubo
    if q.dim > MAX_BRUTE_FORCE_DIM:
        return {}
    _, minimizers = brute_force_minimum(q)
    inst = task.n if task.family is ProblemFamily.FACTOR else task.graph
    optimum_sol = decode_bits(task.family, q, minimizers[0], inst)
    observed = set(hist.counts)
    out = {
        "optimum": optimum_sol.objective,
        "optimal_assignments": len(minimizers),
        "optimum_observed": any("".join(map(str, m)) in observed for m in minimizers),
    }
    if task.family is ProblemFamily.FACTOR:
        out["exact_factorization_exists"] = bool(optimum_sol.details["exact"])
    if sol.feasible:
        ratio = approximation_ratio(task.family, sol.objective, optimum_sol.objective)
        if ratio is not None:
            out["approximation_ratio"] = ratio
    return out


# -- runners ---------------------------------------------------------------------------


def run_qubo_task(spec: ProblemSpec, task: EncodedProblem, name: str, config: RunConfig,
                  catalog: Sequence[DeviceProfile]) -> RunReport:
    q = task.qubo
    if q.dim > MAX_SIM_QUBITS:
        raise SizeError(f"{q.dim} QUBO variables exceed the {MAX_SIM_QUBITS}-qubit simulator")
    seed = instance_seed(config.seed, name)
    opt = optimize_qaoa(q, config.layers, config.budget, seed)
    gammas, betas = opt.best_params
    bound = bind(qaoa_circuit(q, config.layers), qaoa_values(gammas, betas))
    rec, device_seconds = _recommendation_section(bound, catalog, config)
    state = simulate(bound)
    hist = sample(state, config.shots, seed)
    inst = task.n if task.family is ProblemFamily.FACTOR else task.graph
    sol = best_of(hist, task.family, q, inst)
    quality = _quality(task, sol, hist)
    qcf = {"kind": "qubo", "dim": q.dim, "shape": [q.dim, q.dim], "offset": q.offset, "matrix": q.q.tolist()}
    if task.graph_name is not None:
        qcf["graph"] = task.graph_name
    if task.graph is not None and task.graph.original_ids is not None:
        qcf["vertex_ids"] = list(task.graph.original_ids)
    if task.family is ProblemFamily.FACTOR:
        qcf["n"] = task.n
    return RunReport(
        instance=name,
        spec=_spec_section(spec),
        qcf=qcf,
        circuit=_circuit_section(bound, "qaoa", config.layers),
        recommendation=rec,
        execution=_execution_section(hist, seed),
        solution={**sol.to_dict(), "headline": headline(sol)},
        quality=quality,
        timings={
            "estimated_device_seconds": device_seconds,
            "optimizer_evaluations": opt.evaluations,
            "simulated_gates": len(bound.gates),
        },
        summary=_qubo_summary(q.dim, bound.qubit_count, config.layers),
        optimizer={
            "evaluations": opt.evaluations,
            "best_expectation": opt.best_expectation,
            "gammas": list(gammas),
            "betas": list(betas),
        },
        status="ok" if sol.feasible else "infeasible",
    )


_BUILDERS = {
    ProblemFamily.ADD: (adder_circuit, "adder"),
    ProblemFamily.SUB: (subtractor_circuit, "subtractor"),
    ProblemFamily.MUL: (multiplier_circuit, "multiplier"),
}


def run_arithmetic_task(spec: ProblemSpec, task: EncodedProblem, name: str, config: RunConfig,
                        catalog: Sequence[DeviceProfile]) -> RunReport:
    inst = task.arithmetic
    build, kind = _BUILDERS[task.family]
    c = build(inst.bits)
    # The subtractor leaves (b_reg - a_reg) in b_reg; a document's SUB means a - b.
    if task.family is ProblemFamily.SUB:
        bits = input_bits(c, inst.b, inst.a)
    else:
        bits = input_bits(c, inst.a, inst.b)
    start = sum(1 << q for q, b in bits.items() if b)
    seed = instance_seed(config.seed, name)
    rec, device_seconds = _recommendation_section(c, catalog, config)
    state = simulate(c, StateVector.basis(start, c.qubit_count))
    hist = sample(state, config.shots, seed)
    expected = classical_result(task.family.value, inst.a, inst.b, inst.bits)
    sol = decode_arithmetic(state, c, task.family, expected, bits)
    return RunReport(
        instance=name,
        spec=_spec_section(spec),
        qcf={"kind": "arithmetic", "operation": task.family.value, "a": inst.a, "b": inst.b, "bits": inst.bits},
        circuit={**_circuit_section(c, kind), "registers": [
            {"name": r.name, "start": r.start, "size": r.size, "role": r.role} for r in c.registers
        ]},
        recommendation=rec,
        execution=_execution_section(hist, seed),
        solution={**sol.to_dict(), "headline": headline(sol)},
        quality={"expected": expected, "correct": sol.details["correct"]},
        timings={"estimated_device_seconds": device_seconds, "simulated_gates": len(c.gates)},
        summary=f"{inst.bits}-bit {kind} on a {c.qubit_count}-qubit circuit: {inst.a} {task.family.value} {inst.b}",
        status="ok" if sol.feasible else "incorrect",
    )


def run_spec(spec: ProblemSpec, stem: str, config: RunConfig,
             catalog: Sequence[DeviceProfile] | None = None) -> list[RunReport]:
    """Validate and run every task of ``spec``; one report per task."""
    report = validate_spec(spec)
    if not report.ok:
        raise SchemaError("; ".join(report.violations))
    catalog = catalog if catalog is not None else load_catalog(config.catalog)
    tasks = encode_spec(spec, config.penalty)
    out = []
    for task in tasks:
        name = instance_name(stem, task.graph_name, len(tasks))
        runner = run_arithmetic_task if task.is_arithmetic else run_qubo_task
        out.append(runner(spec, task, name, config, catalog))
    return out


def run_file(path: str | Path, config: RunConfig, catalog: Sequence[DeviceProfile] | None = None) -> list[RunReport]:
    path = Path(path)
    spec = parse_spec(path.read_bytes())
    return run_spec(spec, path.stem, config, catalog)


# -- batch -------------------------------------------------------------------------------


@dataclass
class FileOutcome:
    file: str
    entries: list[dict]
    ok: bool


def summary_entry(report: RunReport, file: str) -> dict:
    sol = report.solution
    return {
        "name": report.instance,
        "file": file,
        "family": report.spec["family"],
        "status": "pass" if sol["feasible"] else "fail",
        "feasible": sol["feasible"],
        "report": f"{report.instance}/report.json",
        "summary": report.summary,
        "headline": sol["headline"],
    }


def process_file(path: str, out_dir: str, config: RunConfig) -> FileOutcome:
    """Run one document and write its reports; failures become summary entries."""
    p = Path(path)
    try:
        reports = run_file(p, config)
    except VALIDATION_ERRORS as exc:
        return FileOutcome(p.name, [{"name": p.stem, "file": p.name, "status": "fail", "error": str(exc),
                                     "error_kind": "validation"}], False)
    except QBridgeError as exc:
        return FileOutcome(p.name, [{"name": p.stem, "file": p.name, "status": "fail", "error": str(exc),
                                     "error_kind": "internal"}], False)
    entries = []
    for r in reports:
        emit_report(r, Path(out_dir) / r.instance)
        entries.append(summary_entry(r, p.name))
    return FileOutcome(p.name, entries, all(e["status"] == "pass" for e in entries))


def run_batch(files: Sequence[str | Path], out_dir: str | Path, config: RunConfig, jobs: int = 1) -> tuple[list[dict], Path]:
    files = sorted(str(f) for f in files)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(process_file, files, [str(out_dir)] * len(files), [config] * len(files)))
    else:
        outcomes = [process_file(f, str(out_dir), config) for f in files]
    entries = [e for o in outcomes for e in o.entries]
    summary = write_summary(entries, out_dir, seed=config.seed, shots=config.shots, layers=config.layers)
    return entries, summary
