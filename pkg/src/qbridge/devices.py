"""Device profiles, pricing models and catalog loading."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Union

from .errors import CatalogError
from .transpiler import CouplingMap, NativeGateSet, TranspileMetrics

PROVIDERS = ("IBM", "IonQ", "IQM", "Rigetti", "Quantinuum")


@dataclass(frozen=True)
class PerTaskSeconds:
    """Billed by execution seconds: ``rate * shots * (duration + readout)``."""

    rate: float
    per_task: float = 0.0

    def cost(self, m: TranspileMetrics, shots: int, n_measured: int, device: "DeviceProfile") -> float:
        seconds = shots * (m.estimated_duration + device.duration_readout)
        return self.per_task + self.rate * seconds


@dataclass(frozen=True)
class PerShotGates:
    """Gate-shot pricing with a minimum job price (plus optional flat fees)."""

    price_1q: float
    price_2q: float
    minimum: float = 0.0
    per_shot: float = 0.0
    per_task: float = 0.0

    def cost(self, m: TranspileMetrics, shots: int, n_measured: int, device: "DeviceProfile") -> float:
        computed = self.per_task + shots * (self.per_shot + self.price_1q * m.count_1q + self.price_2q * m.count_2q)
        return max(self.minimum, computed)


@dataclass(frozen=True)
class CreditFormula:
    """``credits = base + (n1q + alpha*n2q + beta*n_meas) * shots / unit``."""

    base: float
    credit_price: float
    unit: float = 5000.0
    alpha: float = 10.0
    beta: float = 5.0

    def credits(self, m: TranspileMetrics, shots: int, n_measured: int) -> float:
        weighted = m.count_1q + self.alpha * m.count_2q + self.beta * n_measured
        return self.base + weighted * shots / self.unit

    def cost(self, m: TranspileMetrics, shots: int, n_measured: int, device: "DeviceProfile") -> float:
        return self.credit_price * self.credits(m, shots, n_measured)


PricingModel = Union[PerTaskSeconds, PerShotGates, CreditFormula]
_PRICING = {
    "per_task_seconds": PerTaskSeconds,
    "per_shot_gates": PerShotGates,
    "credit_formula": CreditFormula,
}


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    provider: str
    qubit_count: int
    coupling: CouplingMap
    native: NativeGateSet
    error_1q: float
    error_2q: float
    error_readout: float
    duration_1q: float
    duration_2q: float
    duration_readout: float
    pricing: PricingModel
    queue_overhead: float = 0.0
    virtual_rz: bool = True

    def __post_init__(self):
        if self.qubit_count < 1:
            raise CatalogError("qubit_count must be >= 1", "qubit_count")
        for f in ("error_1q", "error_2q", "error_readout"):
            v = getattr(self, f)
            if not (0.0 <= v < 1.0):
                raise CatalogError(f"probability must be in [0, 1), got {v}", f)
        for f in ("duration_1q", "duration_2q", "duration_readout"):
            if not getattr(self, f) > 0:
                raise CatalogError("duration must be > 0", f)
        if self.queue_overhead < 0:
            raise CatalogError("queue_overhead must be >= 0", "queue_overhead")

    def with_(self, **changes) -> "DeviceProfile":
        from dataclasses import replace

        return replace(self, **changes)


# -- catalog parsing ------------------------------------------------------------------

_DEVICE_KEYS = {
    "name", "provider", "qubit_count", "coupling", "native", "error_1q", "error_2q",
    "error_readout", "duration_1q", "duration_2q", "duration_readout", "pricing",
    "queue_overhead", "virtual_rz", "notes",
}
_REQUIRED = _DEVICE_KEYS - {"queue_overhead", "virtual_rz", "notes"}


def _number(obj: dict, key: str, path: str, lo: float = 0.0, hi: float = math.inf, hi_open: bool = False) -> float:
    v = obj.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise CatalogError("expected a finite number", f"{path}.{key}")
    if v < lo or v > hi or (hi_open and v >= hi):
        raise CatalogError(f"value {v} out of range", f"{path}.{key}")
    return float(v)


def _parse_pricing(obj: Any, path: str) -> PricingModel:
    if not isinstance(obj, dict) or obj.get("model") not in _PRICING:
        raise CatalogError(f"pricing.model must be one of {sorted(_PRICING)}", f"{path}.model")
    cls = _PRICING[obj["model"]]
    fields = {k: v for k, v in obj.items() if k != "model"}
    allowed = set(cls.__dataclass_fields__)
    extra = set(fields) - allowed
    if extra:
        raise CatalogError(f"unknown pricing field(s) {sorted(extra)}", f"{path}.{sorted(extra)[0]}")
    values = {k: _number(fields, k, path) for k in fields}
    try:
        return cls(**values)
    except TypeError as exc:
        raise CatalogError(f"incomplete pricing model: {exc}", path) from None


def _parse_device(obj: Any, path: str) -> DeviceProfile:
    if not isinstance(obj, dict):
        raise CatalogError("device entry must be an object", path)
    unknown = set(obj) - _DEVICE_KEYS
    if unknown:
        raise CatalogError("unknown field", f"{path}.{sorted(unknown)[0]}")
    missing = _REQUIRED - set(obj)
    if missing:
        raise CatalogError("missing field", f"{path}.{sorted(missing)[0]}")
    if not isinstance(obj["name"], str) or not obj["name"]:
        raise CatalogError("name must be a non-empty string", f"{path}.name")
    if obj["provider"] not in PROVIDERS:
        raise CatalogError(f"provider must be one of {PROVIDERS}", f"{path}.provider")
    n = obj["qubit_count"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise CatalogError("qubit_count must be a positive integer", f"{path}.qubit_count")

    cpl = obj["coupling"]
    if not isinstance(cpl, dict):
        raise CatalogError("coupling must be an object", f"{path}.coupling")
    all_to_all = bool(cpl.get("all_to_all", False))
    edges = cpl.get("edges", [])
    if not isinstance(edges, list) or any(
        not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, int) and 0 <= x < n for x in e) and e[0] != e[1])
        for e in edges
    ):
        raise CatalogError("edges must be pairs of distinct qubit indices", f"{path}.coupling.edges")
    if not all_to_all and not edges and n > 1:
        raise CatalogError("coupling needs edges or all_to_all", f"{path}.coupling")
    coupling = CouplingMap(n, tuple(tuple(e) for e in edges), all_to_all)
    if not all_to_all and len(coupling.bfs_order(0)) != n:
        raise CatalogError("coupling graph is not connected", f"{path}.coupling.edges")

    nat = obj["native"]
    try:
        native = NativeGateSet(frozenset(nat["kinds"]), nat["entangler"])
    except (TypeError, KeyError, ValueError) as exc:
        raise CatalogError(f"invalid native gate set: {exc}", f"{path}.native") from None

    values = {
        "error_1q": _number(obj, "error_1q", path, 0.0, 1.0, hi_open=True),
        "error_2q": _number(obj, "error_2q", path, 0.0, 1.0, hi_open=True),
        "error_readout": _number(obj, "error_readout", path, 0.0, 1.0, hi_open=True),
    }
    for key in ("duration_1q", "duration_2q", "duration_readout"):
        values[key] = _number(obj, key, path)
        if values[key] <= 0:
            raise CatalogError("duration must be > 0", f"{path}.{key}")
    queue = _number(obj, "queue_overhead", path) if "queue_overhead" in obj else 0.0
    return DeviceProfile(
        name=obj["name"],
        provider=obj["provider"],
        qubit_count=n,
        coupling=coupling,
        native=native,
        pricing=_parse_pricing(obj["pricing"], f"{path}.pricing"),
        queue_overhead=queue,
        virtual_rz=bool(obj.get("virtual_rz", True)),
        **values,
    )


def parse_catalog(doc: Any) -> list[DeviceProfile]:
    if not isinstance(doc, dict) or not isinstance(doc.get("devices"), list):
        raise CatalogError("catalog must be an object with a 'devices' list", "$.devices")
    devices = [_parse_device(d, f"$.devices[{i}]") for i, d in enumerate(doc["devices"])]
    if not devices:
        raise CatalogError("catalog is empty", "$.devices")
    names = [d.name for d in devices]
    dup = sorted({x for x in names if names.count(x) > 1})
    if dup:
        raise CatalogError(f"duplicate device name {dup[0]!r}", "$.devices")
    return devices


def default_catalog_path() -> Path:
    return Path(str(resources.files("qbridge") / "data" / "devices.json"))


def load_catalog(path: str | Path | None = None) -> list[DeviceProfile]:
    """Load and validate a device catalog (the bundled nine devices by default)."""
    path = Path(path) if path is not None else default_catalog_path()
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CatalogError(f"catalog file not found: {path}", "$") from None
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CatalogError(f"catalog is not valid JSON: {exc}", "$") from None
    return parse_catalog(doc)
