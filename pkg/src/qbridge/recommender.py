"""Device scoring (error, time, cost), winner selection and the MaxCut sweep."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import networkx as nx
import numpy as np

from .circuit import Circuit, bind, qaoa_circuit, qaoa_parameter_names
from .devices import DeviceProfile
from .dsl import Graph
from .errors import InputError, NoEligibleDeviceError, QBridgeError
from .qubo import qubo_maxcut
from .transpiler import TranspileMetrics, transpile

MAX_SWEEP_QUBITS = 56
# Any nonzero angles give the same gate counts; these only keep the sweep
# circuits executable.
SWEEP_GAMMA = 0.4
SWEEP_BETA = 0.3
CSV_FILES = ("errors_wide.csv", "times_wide.csv", "prices_wide.csv", "winners.csv", "details.csv")


@dataclass(frozen=True)
class Weights:
    w_error: float = 0.5
    w_time: float = 0.25
    w_cost: float = 0.25

    def __post_init__(self):
        values = (self.w_error, self.w_time, self.w_cost)
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise InputError(f"weights must be finite and non-negative, got {values}")
        if sum(values) <= 0:
            raise InputError("weights must not all be zero")

    def normalized(self) -> tuple[float, float, float]:
        total = self.w_error + self.w_time + self.w_cost
        return (self.w_error / total, self.w_time / total, self.w_cost / total)

    @classmethod
    def parse(cls, text: str) -> "Weights":
        parts = text.split(",")
        if len(parts) != 3:
            raise InputError(f"weights need three comma-separated values, got {text!r}")
        try:
            return cls(*(float(p) for p in parts))
        except ValueError:
            raise InputError(f"weights must be numbers, got {text!r}") from None


@dataclass(frozen=True)
class ScoreBreakdown:
    device: str
    provider: str
    eligible: bool
    reason: str = ""
    raw_error: float = math.nan
    raw_time: float = math.nan
    raw_cost: float = math.nan
    norm_error: float = math.nan
    norm_time: float = math.nan
    norm_cost: float = math.nan
    total: float = math.nan
    metrics: TranspileMetrics | None = None

    def to_dict(self) -> dict:
        out = {"device": self.device, "provider": self.provider, "eligible": self.eligible}
        if not self.eligible:
            out["reason"] = self.reason
            return out
        out.update(
            raw_error=self.raw_error,
            raw_time=self.raw_time,
            raw_cost=self.raw_cost,
            norm_error=self.norm_error,
            norm_time=self.norm_time,
            norm_cost=self.norm_cost,
            total=self.total,
            metrics=self.metrics.to_dict() if self.metrics else None,
        )
        return out


def estimate_error(m: TranspileMetrics, d: DeviceProfile, n_measured: int) -> float:
    """Independent-error product model."""
    survive = (
        (1 - d.error_1q) ** m.count_1q
        * (1 - d.error_2q) ** m.count_2q
        * (1 - d.error_readout) ** n_measured
    )
    return 1.0 - survive


def estimate_time(m: TranspileMetrics, d: DeviceProfile, shots: int) -> float:
    return shots * (m.estimated_duration + d.duration_readout) + d.queue_overhead


def estimate_cost(m: TranspileMetrics, d: DeviceProfile, shots: int, n_measured: int = 0) -> float:
    return d.pricing.cost(m, shots, n_measured, d)


def _raw_scores(c: Circuit, d: DeviceProfile, shots: int, n_measured: int) -> ScoreBreakdown:
    if c.qubit_count > d.qubit_count:
        return ScoreBreakdown(
            d.name, d.provider, False, f"needs {c.qubit_count} qubits, device has {d.qubit_count}"
        )
    m = transpile(c, d).metrics
    return ScoreBreakdown(
        d.name,
        d.provider,
        True,
        raw_error=estimate_error(m, d, n_measured),
        raw_time=estimate_time(m, d, shots),
        raw_cost=estimate_cost(m, d, shots, n_measured),
        metrics=m,
    )


def _minmax(values: list[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi - lo <= 1e-12 * max(1.0, abs(hi)):
        return [0.0] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def score(raw: Sequence[ScoreBreakdown], weights: Weights) -> list[ScoreBreakdown]:
    """Min-max normalize each metric over the eligible devices and weight them."""
    eligible = [r for r in raw if r.eligible]
    if not eligible:
        return list(raw)
    we, wt, wc = weights.normalized()
    ne = _minmax([r.raw_error for r in eligible])
    nt = _minmax([r.raw_time for r in eligible])
    nc = _minmax([r.raw_cost for r in eligible])
    scored = {}
    for r, e, t, c in zip(eligible, ne, nt, nc):
        scored[r.device] = ScoreBreakdown(
            r.device, r.provider, True, "",
            r.raw_error, r.raw_time, r.raw_cost, e, t, c,
            we * e + wt * t + wc * c, r.metrics,
        )
    return [scored.get(r.device, r) for r in raw]


def _rank_key(r: ScoreBreakdown):
    return (r.total, r.raw_error, r.device)


def recommend(
    c: Circuit,
    catalog: Sequence[DeviceProfile],
    weights: Weights | None = None,
    shots: int = 4096,
    n_measured: int | None = None,
    jobs: int = 1,
) -> tuple[ScoreBreakdown, list[ScoreBreakdown]]:
    """Score every catalog device for ``c`` and return ``(winner, details)``.

    ``details`` follows catalog order.  The winner has the lowest weighted
    score; ties fall to lower raw error, then device name.
    """
    if not catalog:
        raise QBridgeError("catalog is empty")
    if shots < 1:
        raise InputError(f"shots must be >= 1, got {shots}")
    weights = weights or Weights()
    n_measured = c.qubit_count if n_measured is None else n_measured
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_raw_scores, *zip(*[(c, d, shots, n_measured) for d in catalog])))
    else:
        raw = [_raw_scores(c, d, shots, n_measured) for d in catalog]
    details = score(raw, weights)
    eligible = [r for r in details if r.eligible]
    if not eligible:
        raise NoEligibleDeviceError(f"no device can run a {c.qubit_count}-qubit circuit")
    return min(eligible, key=_rank_key), details


def ranking(details: Sequence[ScoreBreakdown]) -> list[str]:
    return [r.device for r in sorted((r for r in details if r.eligible), key=_rank_key)]


# -- sweep --------------------------------------------------------------------------------


def sweep_seed(seed: int, n: int) -> int:
    return int(np.random.SeedSequence([seed, n]).generate_state(1)[0])


def regular_graph(n: int, seed: int) -> Graph:
    """Seeded random 3-regular graph on ``n`` vertices."""
    if n < 4 or n % 2:
        raise InputError(f"3-regular graphs need an even vertex count >= 4, got {n}")
    g = nx.random_regular_graph(3, n, seed=sweep_seed(seed, n))
    return Graph.from_edges(sorted(tuple(sorted(e)) for e in g.edges()), vertex_count=n)


def sweep_circuit(n: int, seed: int) -> Circuit:
    ansatz = qaoa_circuit(qubo_maxcut(regular_graph(n, seed)), layers=1)
    names = qaoa_parameter_names(1)
    return bind(ansatz, {names[0]: SWEEP_GAMMA, names[1]: SWEEP_BETA})


@dataclass
class SweepResult:
    sizes: list[int]
    devices: list[str]
    rows: dict[int, list[ScoreBreakdown]]
    winners: dict[int, ScoreBreakdown]

    def write(self, out: str | Path) -> list[Path]:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for fname, attr in (("errors_wide.csv", "raw_error"), ("times_wide.csv", "raw_time"), ("prices_wide.csv", "raw_cost")):
            rows = [["n", *self.devices]]
            for n in self.sizes:
                rows.append([str(n), *(_fmt(getattr(r, attr)) if r.eligible else "NA" for r in self.rows[n])])
            paths.append(_write_csv(out / fname, rows))
        rows = [["n", "winner", "provider", "score"]]
        for n in self.sizes:
            w = self.winners[n]
            rows.append([str(n), w.device, w.provider, _fmt(w.total)])
        paths.append(_write_csv(out / "winners.csv", rows))
        header = [
            "n", "device", "provider", "eligible", "reason", "raw_error", "raw_time", "raw_cost",
            "norm_error", "norm_time", "norm_cost", "score", "depth", "count_1q", "count_2q",
            "swap_count", "duration",
        ]
        rows = [header]
        for n in self.sizes:
            for r in self.rows[n]:
                if not r.eligible:
                    rows.append([str(n), r.device, r.provider, "false", r.reason] + ["NA"] * 12)
                    continue
                m = r.metrics
                rows.append([
                    str(n), r.device, r.provider, "true", "",
                    *(_fmt(v) for v in (r.raw_error, r.raw_time, r.raw_cost, r.norm_error, r.norm_time, r.norm_cost, r.total)),
                    str(m.depth), str(m.count_1q), str(m.count_2q), str(m.swap_count), _fmt(m.estimated_duration),
                ])
        paths.append(_write_csv(out / "details.csv", rows))
        return paths


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _write_csv(path: Path, rows: list[list[str]]) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(rows)
    return path


def sweep_maxcut(
    sizes: Sequence[int],
    catalog: Sequence[DeviceProfile],
    weights: Weights | None = None,
    shots: int = 4096,
    seed: int = 7,
    jobs: int = 1,
) -> SweepResult:
    """Score p=1 MaxCut QAOA on seeded 3-regular graphs for every size.

    No simulation happens here, so rows up to 56 qubits stay cheap.
    """
    sizes = list(sizes)
    for n in sizes:
        if n < 4 or n % 2 or n > MAX_SWEEP_QUBITS:
            raise InputError(f"sweep sizes must be even and within 4..{MAX_SWEEP_QUBITS}, got {n}")
    weights = weights or Weights()
    rows, winners = {}, {}
    for n in sizes:
        winner, details = recommend(sweep_circuit(n, seed), catalog, weights, shots, jobs=jobs)
        rows[n], winners[n] = details, winner
    return SweepResult(sizes, [d.name for d in catalog], rows, winners)


DEFAULT_SWEEP_SIZES = tuple(range(4, MAX_SWEEP_QUBITS + 1, 4))
