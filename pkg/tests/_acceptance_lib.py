"""Shared plumbing for the acceptance suite.

Full-corpus VQE runs are expensive (hours single-core), so results are
cached on disk keyed by the FCIDUMP content hash, the method, and the
exact option set.  Tests read through the cache and compute on a miss;
scripts/precompute_acceptance.py fills it ahead of time.  Set
UCCPRUNE_ACCEPTANCE_CACHE=0 to bypass reads (writes still happen).
"""

import csv
import hashlib
import json
import os
from pathlib import Path

from uccprune.fci import fci_ground_state
from uccprune.fcidump import load_fcidump
from uccprune.ml import MlOptions, run_ml_assisted_vqe
from uccprune.refstate import hf_energy
from uccprune.vqe import VqeOptions, run_uccsd_vqe

TESTS_DIR = Path(__file__).resolve().parent
CACHE_DIR = TESTS_DIR / ".acceptance_cache"
DATA_DIR = TESTS_DIR.parent / "data"
MANIFEST = DATA_DIR / "manifest.csv"

# the acceptance option sets; fixed, never overridden per point
METHOD_OPTIONS = {
    "plain": {},
    "sa": {"use_spin_adaptation": True},
    "sa-saf": {
        "use_spin_adaptation": True,
        "use_saf": True,
        "kappa": 2,
        "eps1": 1e-4,
        "eps2": 1e-5,
    },
}
ML_OPTIONS = {
    "n": 4,
    "fraction": 0.35,
    "kernel": "poly",
    "gamma": 1.0,
    "c0": 0.0,
    "degree": 3,
}

# grid index of the PES minimum (equilibrium-like point) per molecule
EQUILIBRIUM_INDEX = {
    "h2": 2,
    "h4_linear": 4,
    "h4_ring": 3,
    "h6": 2,
    "lih": 3,
    "h2o": 4,
}


def corpus_rows(label=None):
    """Manifest rows as dicts with absolute paths and grid indices."""
    rows = []
    with open(MANIFEST, newline="") as handle:
        for row in csv.DictReader(handle):
            if label is not None and row["label"] != label:
                continue
            path = DATA_DIR / row["fcidump_path"]
            rows.append(
                {
                    "label": row["label"],
                    "bond_length": float(row["bond_length"]),
                    "path": path,
                    "index": int(path.stem.split("_")[0]),
                }
            )
    rows.sort(key=lambda r: (r["label"], r["index"]))
    return rows


def _options_fingerprint(method):
    payload = {"method": method, "vqe": METHOD_OPTIONS.get(method, {})}
    if method == "ml":
        payload["vqe"] = METHOD_OPTIONS["sa-saf"]
        payload["ml"] = ML_OPTIONS
    return json.dumps(payload, sort_keys=True)


def cache_key(fcidump_path, method):
    digest = hashlib.sha256()
    digest.update(Path(fcidump_path).read_bytes())
    digest.update(_options_fingerprint(method).encode())
    return digest.hexdigest()[:20]


def cache_path(row, method):
    key = cache_key(row["path"], method)
    return CACHE_DIR / f"{row['label']}_{row['index']:02d}_{method}_{key}.json"


def run_point(fcidump_path, method):
    """One full (FCI + VQE) evaluation; returns a JSON-ready record."""
    integrals = load_fcidump(fcidump_path)
    e_hf = hf_energy(integrals)
    e_fci, _ = fci_ground_state(integrals)
    if method == "ml":
        options = VqeOptions(**METHOD_OPTIONS["sa-saf"])
        result = run_ml_assisted_vqe(
            integrals, base_options=options, ml_options=MlOptions(**ML_OPTIONS)
        )
    else:
        options = VqeOptions(**METHOD_OPTIONS[method])
        result = run_uccsd_vqe(integrals, options=options)
    record = {
        "schema": 1,
        "method": method,
        "e_hf": e_hf,
        "e_fci": e_fci,
        "e_vqe": result.energy,
        "n_params_initial": result.n_params_initial,
        "n_params_final": result.n_params_final,
        "n_iterations": result.n_iterations,
        "dropped_indices": list(result.dropped_indices),
        "theta_final": [float(t) for t in result.theta_final],
        "s_squared": result.s_squared_final,
        "wall_time_s": result.wall_time,
        "status": result.trace.status,
    }
    if method == "ml":
        record["n_full_iterations"] = result.n_full_iterations
        record["n_reduced_iterations"] = result.n_reduced_iterations
        record["n_cycles"] = result.n_cycles
    return record


def get_point(row, method):
    """Cache read-through for one (manifest row, method) evaluation."""
    use_cache = os.environ.get("UCCPRUNE_ACCEPTANCE_CACHE", "1") != "0"
    path = cache_path(row, method)
    if use_cache and path.exists():
        record = json.loads(path.read_text())
        if record.get("schema") == 1:
            return record
    record = run_point(row["path"], method)
    record["label"] = row["label"]
    record["bond_length"] = row["bond_length"]
    CACHE_DIR.mkdir(exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(record, sort_keys=True))
    tmp.replace(path)
    return record
