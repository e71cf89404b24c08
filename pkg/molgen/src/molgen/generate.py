"""Drive geometry -> RHF -> FCIDUMP for the full bond-length corpus.

Layout under the output root:
    <root>/<molecule>/<index>_<length>.fcidump
    <root>/<molecule>/<index>_<length>.meta.json
    <root>/manifest.csv

The manifest has columns label, bond_length, fcidump_path with paths
relative to the manifest's directory.  Each .meta.json sidecar records
the geometry and the reference HF energy for downstream cross-checks.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .fcidump_out import hf_energy_from_mo, write_fcidump
from .geometry import MOLECULES, RING_RADIUS_ANG, build_geometry, grid, _spec
from .scf import mo_integrals, run_rhf

GENERATOR = "molgen 1.0 (STO-3G RHF, McMurchie-Davidson integrals)"


def generate_point(molecule, bond_length, out_dir):
    """Generate one FCIDUMP + sidecar; returns the sidecar metadata dict."""
    spec = _spec(molecule)
    atoms = build_geometry(molecule, bond_length)
    scf = run_rhf(atoms, n_electrons=spec.n_electrons)
    h1, h2 = mo_integrals(scf)

    e_check = hf_energy_from_mo(h1, h2, scf.e_nuc, scf.n_electrons)
    if abs(e_check - scf.e_total) > 1e-10:
        raise RuntimeError(
            f"{molecule} @ {bond_length}: MO-basis HF energy {e_check!r} "
            f"disagrees with SCF total {scf.e_total!r}"
        )

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    index = int(np.argmin(np.abs(grid(molecule) - bond_length)))
    stem = f"{index:02d}_{bond_length:.4f}"
    fcidump_path = out_dir / f"{stem}.fcidump"
    write_fcidump(fcidump_path, h1, h2, scf.e_nuc, scf.n_electrons)

    meta = {
        "molecule": spec.molecule,
        "label": spec.molecule,
        "bond_length": float(bond_length),
        "scan_parameter": spec.scan_parameter,
        "units": "angstrom",
        "basis": "STO-3G",
        "e_hf": scf.e_total,
        "e_nuc": scf.e_nuc,
        "n_basis": scf.n_basis,
        "n_electrons": scf.n_electrons,
        "generator": GENERATOR,
        "geometry": [
            {"symbol": sym, "xyz_bohr": [float(x) for x in xyz]}
            for sym, xyz in atoms
        ],
    }
    if spec.molecule == "h4_ring":
        meta["ring_radius_angstrom"] = RING_RADIUS_ANG
    fcidump_path.with_suffix(".meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n"
    )
    meta["fcidump_path"] = str(fcidump_path)
    return meta


def generate_corpus(root, molecules=None, verbose=True):
    """Generate every molecule's 12-point grid and write manifest.csv."""
    root = Path(root)
    molecules = list(molecules) if molecules else list(MOLECULES)
    rows = []
    for molecule in molecules:
        for bond_length in grid(molecule):
            meta = generate_point(molecule, bond_length, root / molecule)
            rel = Path(meta["fcidump_path"]).relative_to(root)
            rows.append((meta["label"], meta["bond_length"], str(rel)))
            if verbose:
                print(
                    f"{meta['label']:>10s}  d={meta['bond_length']:.4f} A  "
                    f"E_HF={meta['e_hf']: .10f}  -> {rel}"
                )
    manifest = root / "manifest.csv"
    with open(manifest, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["label", "bond_length", "fcidump_path"])
        for label, bond_length, rel in rows:
            writer.writerow([label, repr(bond_length), rel])
    if verbose:
        print(f"wrote {len(rows)} entries to {manifest}")
    return manifest
