"""Command-line driver: single points, scans, entropy reports, FCI.

Subcommands: vqe, scan, entropy, fci. Options come from an optional YAML
config file plus flags; flags win. Exit codes: 1 for unreadable or
malformed input, 2 for capacity limits, 3 for non-convergence. All output
files are deterministic for a fixed config, except wall-time fields.

CSV row schema (results.csv and scan_<method>.csv):
    label, bond_length, e_hf, e_mp2, e_vqe, e_fci,
    n_params_initial, n_params_final, n_iterations, wall_time_s
where e_mp2 is the total MP2 energy (HF plus correlation).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .entropy import entropy_profile, profile_csv_rows, select_frozen
from .errors import CapacityError, ContractViolation, ConvergenceError, FcidumpError
from .fcidump import IntegralSet, freeze_orbitals, load_fcidump
from .fci import fci_ground_state
from .fermion import enumerate_excitations
from .ml import MlOptions, MlVqeResult, run_ml_assisted_vqe, save_model
from .refstate import mp2
from .vqe import VqeOptions, run_uccsd_vqe

_METHODS = ("plain", "sa", "sa-saf", "ml")
_CSV_FIELDS = (
    "label",
    "bond_length",
    "e_hf",
    "e_mp2",
    "e_vqe",
    "e_fci",
    "n_params_initial",
    "n_params_final",
    "n_iterations",
    "wall_time_s",
)
SCHEMA_DIR = Path(__file__).parent / "schemas"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; remap to the parse-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


@dataclass(slots=True)
class RunConfig:
    """Everything one run needs; built from config file plus flags."""

    method: str = "plain"
    vqe: VqeOptions | None = None
    ml: MlOptions | None = None
    freeze_k: int | None = None
    freeze_eta: float | None = None
    source: str = "mp2"
    label: str | None = None
    bond_length: float | None = None
    out_dir: str = "."
    workers: int = 1


def _vqe_options_for(method: str, raw: dict) -> VqeOptions:
    opts = dict(raw)
    opts["use_spin_adaptation"] = method in ("sa", "sa-saf", "ml")
    opts["use_saf"] = method in ("sa-saf", "ml")
    return VqeOptions(**opts)


def _load_config_file(path) -> dict:
    try:
        with open(path) as handle:
            data = yaml.safe_load(handle) or {}
    except yaml.YAMLError as exc:
        raise FcidumpError(f"config file {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise FcidumpError(f"config file {path} must contain a mapping")
    return data


def build_config(args) -> RunConfig:
    """Merge config-file values with flags; flags win."""
    file_cfg = _load_config_file(args.config) if args.config else {}
    vqe_cfg = dict(file_cfg.get("vqe", {}))
    ml_cfg = dict(file_cfg.get("ml", {}))
    freeze_cfg = dict(file_cfg.get("freeze", {}))

    method = args.method or file_cfg.get("method") or "plain"
    if method not in _METHODS:
        raise FcidumpError(f"unknown method {method!r}")

    for flag, key in (("kappa", "kappa"), ("eps1", "eps1"), ("eps2", "eps2"),
                      ("energy_tol", "energy_tol")):
        value = getattr(args, flag, None)
        if value is not None:
            vqe_cfg[key] = value
    for flag, key in (("ml_n", "n"), ("ml_fraction", "fraction"), ("kernel", "kernel"),
                      ("gamma", "gamma"), ("c0", "c0"), ("degree", "degree"),
                      ("lam", "lam")):
        value = getattr(args, flag, None)
        if value is not None:
            ml_cfg[key] = value
    if getattr(args, "freeze_k", None) is not None:
        freeze_cfg = {"k": args.freeze_k}
    if getattr(args, "freeze_eta", None) is not None:
        freeze_cfg = {"eta": args.freeze_eta}
    if "lambda" in ml_cfg:
        ml_cfg["lam"] = ml_cfg.pop("lambda")

    workers = args.workers if getattr(args, "workers", None) is not None else file_cfg.get(
        "workers", int(os.environ.get("UCCPRUNE_WORKERS", "1"))
    )
    try:
        cfg = RunConfig(
            method=method,
            vqe=_vqe_options_for(method, vqe_cfg),
            ml=MlOptions(**ml_cfg) if method == "ml" else None,
            freeze_k=freeze_cfg.get("k"),
            freeze_eta=freeze_cfg.get("eta"),
            source=getattr(args, "source", None) or file_cfg.get("source", "mp2"),
            label=getattr(args, "label", None) or file_cfg.get("label"),
            bond_length=(
                args.bond_length
                if getattr(args, "bond_length", None) is not None
                else file_cfg.get("bond_length")
            ),
            out_dir=getattr(args, "out_dir", None) or file_cfg.get("out_dir", "."),
            workers=int(workers),
        )
    except (TypeError, ValueError) as exc:
        raise FcidumpError(f"invalid configuration: {exc}") from exc
    return cfg


def _sidecar_bond_length(fcidump_path) -> float | None:
    meta = Path(str(fcidump_path)).with_suffix(".meta.json")
    if meta.exists():
        try:
            return float(json.loads(meta.read_text()).get("bond_length"))
        except (ValueError, TypeError, json.JSONDecodeError):
            return None
    return None


def _apply_freeze(integrals: IntegralSet, config: RunConfig):
    """Entropy-guided core folding; returns (integrals, frozen list)."""
    if config.freeze_k is None and config.freeze_eta is None:
        return integrals, []
    profile = entropy_profile(integrals, source=config.source)
    frozen = select_frozen(profile, k=config.freeze_k, eta=config.freeze_eta)
    if not frozen:
        return integrals, []
    return freeze_orbitals(integrals, frozen), sorted(frozen)


@dataclass(slots=True)
class PointResult:
    label: str
    bond_length: float | None
    e_hf: float
    e_mp2: float
    e_vqe: float
    e_fci: float
    frozen: list
    n_qubits: int
    result: object

    def csv_row(self) -> dict:
        blank = self.bond_length is None or (
            isinstance(self.bond_length, float) and math.isnan(self.bond_length)
        )
        return {
            "label": self.label,
            "bond_length": "" if blank else repr(float(self.bond_length)),
            "e_hf": repr(self.e_hf),
            "e_mp2": repr(self.e_mp2),
            "e_vqe": repr(self.e_vqe),
            "e_fci": repr(self.e_fci),
            "n_params_initial": self.result.n_params_initial,
            "n_params_final": self.result.n_params_final,
            "n_iterations": self.result.n_iterations,
            "wall_time_s": f"{self.result.wall_time:.3f}",
        }


def evaluate_point(integrals: IntegralSet, config: RunConfig, label="point",
                   bond_length=None) -> PointResult:
    """One full single-point evaluation: freeze, reference, VQE, FCI."""
    integrals, frozen = _apply_freeze(integrals, config)
    ref = mp2(integrals)
    e_fci, _ = fci_ground_state(integrals)
    if config.method == "ml":
        result = run_ml_assisted_vqe(integrals, config.vqe, config.ml)
    else:
        result = run_uccsd_vqe(integrals, config.vqe)
    if result.trace.status not in ("converged",):
        raise ConvergenceError(
            f"{label}: optimizer stopped without converging ({result.trace.status})"
        )
    return PointResult(
        label=label,
        bond_length=bond_length,
        e_hf=ref.e_hf,
        e_mp2=ref.e_mp2_total,
        e_vqe=result.energy,
        e_fci=e_fci,
        frozen=frozen,
        n_qubits=integrals.n_qubits,
        result=result,
    )


def _result_json(point: PointResult, config: RunConfig, command: str) -> dict:
    result = point.result
    payload = {
        "schema_version": 1,
        "command": command,
        "method": config.method,
        "label": point.label,
        "bond_length": point.bond_length,
        "n_qubits": point.n_qubits,
        "frozen_orbitals": list(point.frozen),
        "e_hf": point.e_hf,
        "e_mp2": point.e_mp2,
        "e_vqe": point.e_vqe,
        "e_fci": point.e_fci,
        "n_params_initial": result.n_params_initial,
        "n_params_final": result.n_params_final,
        "n_iterations": result.n_iterations,
        "wall_time_s": result.wall_time,
        "theta_final": [float(v) for v in result.theta_final],
        "dropped_indices": [int(k) for k in result.dropped_indices],
        "s_squared": float(result.s_squared_final),
        "status": result.trace.status,
    }
    if isinstance(result, MlVqeResult):
        payload["ml"] = {
            "n_full_iterations": result.n_full_iterations,
            "n_reduced_iterations": result.n_reduced_iterations,
            "n_cycles": result.n_cycles,
        }
    return payload


def _write_json(path, payload):
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _append_csv_row(path, row):
    new = not Path(path).exists()
    with open(path, "a", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=_CSV_FIELDS)
        if new:
            writer.writeheader()
        writer.writerow(row)


def cmd_vqe(args) -> int:
    config = build_config(args)
    integrals = load_fcidump(args.fcidump)
    label = config.label or Path(args.fcidump).stem
    bond = config.bond_length
    if bond is None:
        bond = _sidecar_bond_length(args.fcidump)
    point = evaluate_point(integrals, config, label=label, bond_length=bond)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "result.json", _result_json(point, config, "vqe"))
    if isinstance(point.result, MlVqeResult) and point.result.model is not None:
        save_model(point.result.model, out_dir / "ml_model.json")
    _append_csv_row(out_dir / "results.csv", point.csv_row())
    print(
        f"{label}: e_vqe={point.e_vqe:.10f} e_fci={point.e_fci:.10f} "
        f"params {point.result.n_params_initial}->{point.result.n_params_final} "
        f"iters {point.result.n_iterations}"
    )
    return 0


def read_manifest(path) -> list:
    """Scan manifest: CSV with header label, bond_length, fcidump_path."""
    rows = []
    base = Path(path).parent
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        needed = {"label", "bond_length", "fcidump_path"}
        if reader.fieldnames is None:
            return []
        if not needed.issubset({name.strip() for name in reader.fieldnames}):
            raise FcidumpError(
                f"manifest {path} must have columns label, bond_length, fcidump_path"
            )
        for record in reader:
            fc = Path(record["fcidump_path"].strip())
            if not fc.is_absolute():
                fc = base / fc
            rows.append(
                {
                    "label": record["label"].strip(),
                    "bond_length": float(record["bond_length"]),
                    "fcidump_path": str(fc),
                }
            )
    return rows


def _scan_one(task):
    """Worker: one manifest row -> (row dict, error string or None)."""
    row, args_dict = task
    args = argparse.Namespace(**args_dict)
    try:
        config = build_config(args)
        integrals = load_fcidump(row["fcidump_path"])
        point = evaluate_point(
            integrals, config, label=row["label"], bond_length=row["bond_length"]
        )
        return point.csv_row(), None
    except Exception as exc:  # per-row failures recorded, scan continues
        return {"label": row["label"], "bond_length": repr(row["bond_length"])}, str(exc)


def cmd_scan(args) -> int:
    config = build_config(args)
    rows = read_manifest(args.manifest)
    if args.label_filter:
        rows = [r for r in rows if r["label"] in set(args.label_filter)]
    rows.sort(key=lambda r: (r["label"], r["bond_length"]))
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    args_dict = dict(vars(args))
    tasks = [(row, args_dict) for row in rows]
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_scan_one, tasks))
    else:
        outcomes = [_scan_one(task) for task in tasks]

    good = [row for row, err in outcomes if err is None]
    failures = [
        {"label": row["label"], "bond_length": row["bond_length"], "error": err}
        for row, err in outcomes
        if err is not None
    ]
    scan_csv = out_dir / f"scan_{config.method}.csv"
    with open(scan_csv, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=_CSV_FIELDS)
        writer.writeheader()
        for row in good:
            writer.writerow(row)
    summary = _scan_summary(out_dir, config.method, good, failures)
    _write_json(out_dir / "summary.json", summary)
    print(
        f"scan [{config.method}]: {len(good)} points ok, {len(failures)} failed "
        f"-> {scan_csv}"
    )
    return 0 if not failures else 3


def _scan_summary(out_dir: Path, method: str, good: list, failures: list) -> dict:
    """Per-point diffs vs FCI, plus method-vs-method diffs against any
    other scan CSVs already present in the same output directory."""
    points = [
        {
            "label": row["label"],
            "bond_length": float(row["bond_length"]),
            "e_vqe": float(row["e_vqe"]),
            "e_fci": float(row["e_fci"]),
            "error_vs_fci": float(row["e_vqe"]) - float(row["e_fci"]),
        }
        for row in good
    ]
    comparisons = {}
    for other_csv in sorted(out_dir.glob("scan_*.csv")):
        other = other_csv.stem.replace("scan_", "", 1)
        if other == method:
            continue
        theirs = {}
        with open(other_csv, newline="") as handle:
            for record in csv.DictReader(handle):
                theirs[(record["label"], float(record["bond_length"]))] = float(
                    record["e_vqe"]
                )
        diffs = [
            {
                "label": pt["label"],
                "bond_length": pt["bond_length"],
                "delta_e": pt["e_vqe"] - theirs[(pt["label"], pt["bond_length"])],
            }
            for pt in points
            if (pt["label"], pt["bond_length"]) in theirs
        ]
        if diffs:
            comparisons[f"{method}_minus_{other}"] = diffs
    return {
        "schema_version": 1,
        "method": method,
        "points": points,
        "failures": failures,
        "comparisons": comparisons,
    }


def cmd_entropy(args) -> int:
    config = build_config(args)
    integrals = load_fcidump(args.fcidump)
    bond = config.bond_length
    if bond is None:
        bond = _sidecar_bond_length(args.fcidump)
    profile = entropy_profile(integrals, source=config.source)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "entropy.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["bond_length", "orbital_index", "entropy", "source"])
        for row in profile_csv_rows(profile, bond if bond is not None else float("nan")):
            writer.writerow(row)

    report = {
        "schema_version": 1,
        "command": "entropy",
        "source": config.source,
        "bond_length": bond,
        "entropies": [float(s) for s in profile.entropies],
        "n_qubits": integrals.n_qubits,
        "n_params": len(enumerate_excitations(integrals.n_occ, integrals.n_virt)),
    }
    wants_freeze = config.freeze_k is not None or config.freeze_eta is not None
    if wants_freeze and (config.freeze_k or config.freeze_eta):
        frozen = select_frozen(profile, k=config.freeze_k, eta=config.freeze_eta)
    else:
        frozen = []
    if frozen:
        reduced = freeze_orbitals(integrals, frozen)
        report["frozen_orbitals"] = sorted(frozen)
        report["qubits_after"] = reduced.n_qubits
        report["params_after"] = len(
            enumerate_excitations(reduced.n_occ, reduced.n_virt)
        )
        print(
            f"freeze {sorted(frozen)}: {integrals.n_qubits} -> {report['qubits_after']} "
            f"qubits, {report['n_params']} -> {report['params_after']} parameters"
        )
    else:
        report["frozen_orbitals"] = []
        print("no freeze recommendation")
    _write_json(out_dir / "entropy.json", report)
    return 0


def cmd_fci(args) -> int:
    config = build_config(args)
    integrals = load_fcidump(args.fcidump)
    ref = mp2(integrals)
    e_fci, ci = fci_ground_state(integrals)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "schema_version": 1,
        "command": "fci",
        "label": config.label or Path(args.fcidump).stem,
        "n_qubits": integrals.n_qubits,
        "e_hf": ref.e_hf,
        "e_mp2": ref.e_mp2_total,
        "e_fci": e_fci,
        "mp2_vs_fci": abs(ref.e_mp2_total - e_fci),
        "n_determinants": len(ci),
    }
    _write_json(out_dir / "fci.json", payload)
    print(f"e_fci={e_fci:.10f} e_hf={ref.e_hf:.10f} dets={len(ci)}")
    return 0


def _add_common(sub):
    sub.add_argument("--config", help="YAML config file; flags override it")
    sub.add_argument("--method", choices=_METHODS)
    sub.add_argument("--kappa", type=int)
    sub.add_argument("--eps1", type=float)
    sub.add_argument("--eps2", type=float)
    sub.add_argument("--energy-tol", dest="energy_tol", type=float)
    sub.add_argument("--freeze-k", dest="freeze_k", type=int)
    sub.add_argument("--freeze-eta", dest="freeze_eta", type=float)
    sub.add_argument("--ml-n", dest="ml_n", type=int)
    sub.add_argument("--ml-fraction", dest="ml_fraction", type=float)
    sub.add_argument("--kernel", choices=("linear", "poly"))
    sub.add_argument("--gamma", type=float)
    sub.add_argument("--c0", type=float)
    sub.add_argument("--degree", type=int)
    sub.add_argument("--lambda", dest="lam", type=float)
    sub.add_argument("--label")
    sub.add_argument("--bond-length", dest="bond_length", type=float)
    sub.add_argument("--out-dir", dest="out_dir")
    sub.add_argument("--workers", type=int,
                     help="parallel scan rows (default: UCCPRUNE_WORKERS or 1)")
    sub.add_argument("--source", choices=("mp2", "fci"),
                     help="entropy wavefunction source")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uccprune", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_vqe = subs.add_parser("vqe", help="single-point UCCSD-VQE run")
    p_vqe.add_argument("fcidump")
    _add_common(p_vqe)
    p_vqe.set_defaults(func=cmd_vqe)

    p_scan = subs.add_parser("scan", help="run every row of a manifest")
    p_scan.add_argument("manifest")
    p_scan.add_argument("--only", dest="label_filter", action="append",
                        help="restrict to rows with this label (repeatable)")
    _add_common(p_scan)
    p_scan.set_defaults(func=cmd_scan)

    p_ent = subs.add_parser("entropy", help="orbital entropy report")
    p_ent.add_argument("fcidump")
    _add_common(p_ent)
    p_ent.set_defaults(func=cmd_entropy)

    p_fci = subs.add_parser("fci", help="exact ground state in the HF sector")
    p_fci.add_argument("fcidump")
    _add_common(p_fci)
    p_fci.set_defaults(func=cmd_fci)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FcidumpError, ContractViolation, ValueError, FileNotFoundError,
            IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
