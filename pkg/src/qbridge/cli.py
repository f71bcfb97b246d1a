"""Command-line entry point: ``qbridge {run,batch,recommend,doctor}``.

Exit codes: 0 success, 1 validation failure (bad input, failed instance or
failed check), 2 internal error.
"""

from __future__ import annotations

import argparse
import logging
import platform
import sys
import tempfile
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .devices import default_catalog_path, load_catalog
from .errors import CatalogError, QBridgeError, SchemaError, SpecError
from .pipeline import VALIDATION_ERRORS, RunConfig, run_batch, run_file, summary_entry
from .recommender import CSV_FILES, DEFAULT_SWEEP_SIZES, Weights, sweep_maxcut
from .report import emit_report, write_summary

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2
DEFAULT_OUT = "artifacts"

log = logging.getLogger("qbridge")


def _error(kind: str, message: str):
    print(f"error: {kind}: {message}", file=sys.stderr)


def _kind(exc: Exception) -> str:
    # every problem-document error is reported under the schema category
    return "SchemaError" if isinstance(exc, (SchemaError, SpecError)) else type(exc).__name__


def _weights(text: str) -> Weights:
    try:
        return Weights.parse(text)
    except QBridgeError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _sizes(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got {text!r}") from None


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        seed=args.seed,
        shots=args.shots,
        layers=args.layers,
        weights=args.weights,
        penalty=args.penalty,
        catalog=args.catalog,
        budget=args.budget,
    )


def smoke_corpus_dir() -> Path:
    return Path(str(resources.files("qbridge") / "data" / "smoke"))


# -- commands --------------------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    config = _config(args)
    out = Path(args.out)
    reports = run_file(args.input, config)
    entries = []
    for r in reports:
        emit_report(r, out / r.instance)
        sol = r.solution
        entries.append(summary_entry(r, Path(args.input).name))
        print(f"{r.instance}: {r.summary}; {sol['headline']}; device {r.recommendation['winner']}")
    write_summary(entries, out, seed=config.seed, shots=config.shots, layers=config.layers)
    return EXIT_OK


def cmd_batch(args: argparse.Namespace) -> int:
    config = _config(args)
    directory = Path(args.input) if args.input else smoke_corpus_dir()
    if not directory.is_dir():
        _error("InputError", f"not a directory: {directory}")
        return EXIT_INVALID
    files = sorted(directory.glob("*.json"))
    if not files:
        _error("InputError", f"no instances in {directory}")
        return EXIT_INVALID
    entries, summary = run_batch(files, args.out, config, jobs=args.jobs)
    for e in entries:
        detail = e.get("headline") or e.get("error", "")
        print(f"{e['status'].upper():4} {e['name']}: {detail}")
    failed = sum(e["status"] != "pass" for e in entries)
    print(f"{len(entries) - failed}/{len(entries)} passed; summary at {summary}")
    return EXIT_OK if failed == 0 else EXIT_INVALID


def cmd_recommend(args: argparse.Namespace) -> int:
    catalog = load_catalog(args.catalog)
    result = sweep_maxcut(args.sizes, catalog, args.weights, args.shots, args.seed, jobs=args.jobs)
    paths = result.write(args.out)
    for n in result.sizes:
        w = result.winners[n]
        print(f"n={n:3d} winner {w.device} ({w.provider}) score {w.total:.6g}")
    print("wrote " + ", ".join(str(p) for p in paths))
    return EXIT_OK


def _self_test() -> str:
    from .circuit import Circuit, Gate
    from .simulator import StateVector, simulate

    plus = simulate(Circuit(1, (Gate("H", (0,)),))).probabilities()
    if not np.allclose(plus, [0.5, 0.5], atol=1e-12):
        raise QBridgeError(f"H|0> gave {plus}")
    for k, want in ((0, 0), (1, 3), (2, 2), (3, 1)):  # qubit 0 controls qubit 1
        got = simulate(Circuit(2, (Gate("CX", (0, 1)),)), StateVector.basis(k, 2)).probabilities()
        if abs(got[want] - 1) > 1e-12:
            raise QBridgeError(f"CX|{k}> did not map to |{want}>")
    return "H and CX basis checks"


def cmd_doctor(args: argparse.Namespace) -> int:
    checks: list[tuple[str, bool, str]] = []
    checks.append(("python", sys.version_info >= (3, 10), platform.python_version()))
    catalog_path = Path(args.catalog) if args.catalog else default_catalog_path()
    try:
        devices = load_catalog(catalog_path)
        providers = len({d.provider for d in devices})
        checks.append(("catalog", True, f"{len(devices)} devices, {providers} providers ({catalog_path})"))
    except CatalogError as exc:
        checks.append(("catalog", False, f"{catalog_path}: {exc}"))
    try:
        checks.append(("simulator", True, _self_test()))
    except QBridgeError as exc:
        checks.append(("simulator", False, str(exc)))
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out, prefix=".doctor-", delete=True) as fh:
            fh.write(b"ok")
        checks.append(("output", True, f"{out} writable"))
    except OSError as exc:
        checks.append(("output", False, f"IoError: {out}: {exc.strerror or exc}"))
    width = max(len(name) for name, _, _ in checks)
    for name, ok, detail in checks:
        print(f"{name:<{width}}  {'ok' if ok else 'FAIL':<4}  {detail}")
    return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_INVALID


# -- parser --------------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, out_default: str):
    p.add_argument("--out", default=out_default, help=f"output directory (default: {out_default})")
    p.add_argument("--seed", type=int, default=7, help="root random seed (default: 7)")
    p.add_argument("--shots", type=int, default=4096, help="shots per run (default: 4096)")
    p.add_argument("--weights", type=_weights, default=Weights(), metavar="E,T,C",
                   help="error,time,cost weights (default: 0.5,0.25,0.25)")
    p.add_argument("--catalog", default=None, help="device catalog JSON (default: bundled catalog)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (outputs do not depend on it)")


def _pipeline_flags(p: argparse.ArgumentParser):
    p.add_argument("--layers", type=int, default=1, help="QAOA layers (default: 1)")
    p.add_argument("--penalty", type=float, default=None, help="constraint penalty override")
    p.add_argument("--budget", type=int, default=200, help="objective evaluations for parameter search")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbridge", description=__doc__.splitlines()[0])
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one problem document end to end")
    p.add_argument("--input", required=True, help="problem document (JSON)")
    _common(p, f"{DEFAULT_OUT}/run")
    _pipeline_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("batch", help="run every document in a directory")
    p.add_argument("--input", default=None, help="directory of documents (default: bundled smoke corpus)")
    _common(p, f"{DEFAULT_OUT}/smoke")
    _pipeline_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("recommend", help="MaxCut device-selection sweep; writes the CSV set")
    _common(p, f"{DEFAULT_OUT}/recommender")
    p.add_argument("--sizes", type=_sizes, default=list(DEFAULT_SWEEP_SIZES),
                   help="comma-separated even qubit counts (default: 4,8,...,56)")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("doctor", help="check catalog, simulator and output directory")
    p.add_argument("--catalog", default=None, help="device catalog JSON to check")
    p.add_argument("--out", default=DEFAULT_OUT, help="output directory to check")
    p.set_defaults(func=cmd_doctor)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except VALIDATION_ERRORS as exc:
        _error(_kind(exc), str(exc))
        return EXIT_INVALID
    except CatalogError as exc:
        _error("CatalogError", str(exc))
        return EXIT_INVALID
    except FileNotFoundError as exc:
        _error("InputError", f"{exc.filename}: file not found")
        return EXIT_INVALID
    except QBridgeError as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_INTERNAL
    except OSError as exc:
        _error("IoError", str(exc))
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort contract for exit code 2
        _error("InternalError", f"{type(exc).__name__}: {exc}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
