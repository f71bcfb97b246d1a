"""Run reports: canonical JSON, a Markdown rendering and the batch summary."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

REPORT_VERSION = "1"


def _clean(obj: Any) -> Any:
    """Tuples to lists, non-finite floats to None (reports are strict JSON)."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):  # numpy scalars
        return _clean(obj.item())
    return obj


def canonical_json(obj: Any) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


@dataclass
class RunReport:
    instance: str
    spec: dict
    qcf: dict
    circuit: dict
    recommendation: dict
    execution: dict
    solution: dict
    quality: dict
    timings: dict
    summary: str
    optimizer: dict | None = None
    status: str = "ok"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "version": REPORT_VERSION,
            "instance": self.instance,
            "status": self.status,
            "summary": self.summary,
            "spec": self.spec,
            "qcf": self.qcf,
            "circuit": self.circuit,
            "recommendation": self.recommendation,
            "execution": self.execution,
            "solution": self.solution,
            "quality": self.quality,
            "timings": self.timings,
        }
        if self.optimizer is not None:
            out["optimizer"] = self.optimizer
        out.update(self.extra)
        return _clean(out)


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def render_markdown(report: dict) -> str:
    """Human-readable rendering of the same content as report.json."""
    spec, qcf, circ = report["spec"], report["qcf"], report["circuit"]
    rec, exe, sol, qual = report["recommendation"], report["execution"], report["solution"], report["quality"]
    lines = [f"# {report['instance']}", "", report["summary"], ""]
    lines += ["## Problem", "", f"- family: {spec['family']}"]
    if spec.get("goal"):
        lines.append(f"- goal: {spec['goal']}")
    if spec.get("description"):
        lines.append(f"- description: {spec['description']}")
    lines += ["", "## Encoding", ""]
    for key in sorted(k for k in qcf if k != "matrix"):
        lines.append(f"- {key}: {_fmt(qcf[key])}")
    if "matrix" in qcf:
        lines += ["", "```"]
        lines += [" ".join(f"{v:8.3g}" for v in row) for row in qcf["matrix"]]
        lines += ["```"]
    lines += ["", "## Circuit", ""]
    lines += [f"- kind: {circ['kind']}", f"- qubits: {circ['qubits']}", f"- depth: {circ['depth']}"]
    lines.append("- gates: " + ", ".join(f"{k}={v}" for k, v in circ["gate_counts"].items()))
    opt = report.get("optimizer")
    if opt:
        lines += ["", "## Parameter search", ""]
        lines += [f"- evaluations: {opt['evaluations']}", f"- best expectation: {_fmt(opt['best_expectation'])}"]
        lines += [f"- gammas: {', '.join(_fmt(g) for g in opt['gammas'])}", f"- betas: {', '.join(_fmt(b) for b in opt['betas'])}"]
    lines += ["", "## Device recommendation", ""]
    lines.append(f"- winner: {rec['winner']} (weights {', '.join(_fmt(w) for w in rec['weights'])}; {rec['shots']} shots)")
    lines += ["", "| device | eligible | error | time [s] | cost | score |", "|---|---|---|---|---|---|"]
    for d in rec["details"]:
        if d["eligible"]:
            lines.append(f"| {d['device']} | yes | {_fmt(d['raw_error'])} | {_fmt(d['raw_time'])} | {_fmt(d['raw_cost'])} | {_fmt(d['total'])} |")
        else:
            lines.append(f"| {d['device']} | no ({d['reason']}) | NA | NA | NA | NA |")
    lines += ["", "## Execution", ""]
    lines += [f"- backend: {exe['backend']}", f"- shots: {exe['shots']}", f"- seed: {exe['seed']}"]
    lines += ["", "| bitstring | count |", "|---|---|"]
    lines += [f"| `{o['bitstring']}` | {o['count']} |" for o in exe["top_outcomes"]]
    lines += ["", "## Solution", ""]
    for key in sorted(sol):
        lines.append(f"- {key}: {_fmt(sol[key])}")
    lines += ["", "## Quality", ""]
    lines += [f"- {key}: {_fmt(qual[key])}" for key in sorted(qual)] or ["- none"]
    lines += ["", "## Counters", ""]
    lines += [f"- {key}: {_fmt(v)}" for key, v in sorted(report["timings"].items())]
    return "\n".join(lines) + "\n"


def emit_report(r: RunReport | dict, out_dir: str | Path) -> list[Path]:
    """Write ``report.json`` (sorted keys) and ``report.md`` into ``out_dir``."""
    data = r.to_dict() if isinstance(r, RunReport) else r
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jpath, mpath = out / "report.json", out / "report.md"
    jpath.write_text(canonical_json(data), encoding="utf-8")
    mpath.write_text(render_markdown(data), encoding="utf-8")
    return [jpath, mpath]


def write_summary(entries: list[dict], out_dir: str | Path, **meta) -> Path:
    entries = sorted(entries, key=lambda e: e["name"])
    passed = sum(1 for e in entries if e["status"] == "pass")
    doc = {
        **meta,
        "instances": entries,
        "total": len(entries),
        "passed": passed,
        "failed": len(entries) - passed,
    }
    path = Path(out_dir) / "summary.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(doc), encoding="utf-8")
    return path
