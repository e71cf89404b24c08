"""End-to-end CLI behaviour: subcommands, config merging, exit codes."""

import csv
import json
from pathlib import Path

import jsonschema
import pytest

from uccprune.cli import SCHEMA_DIR, build_config, main, make_parser, read_manifest
from uccprune.fcidump import save_fcidump

from _testlib import random_integrals

DATA = Path(__file__).resolve().parent.parent / "data"
H2 = DATA / "h2" / "02_0.7909.fcidump"
LIH = sorted((DATA / "lih").glob("02_*.fcidump"))[0]

RESULT_SCHEMA = json.loads((SCHEMA_DIR / "result.schema.json").read_text())
SUMMARY_SCHEMA = json.loads((SCHEMA_DIR / "summary.schema.json").read_text())


def run_cli(*argv):
    return main([str(a) for a in argv])


# -- vqe --------------------------------------------------------------------


def test_vqe_single_point(tmp_path, capsys):
    code = run_cli("vqe", H2, "--out-dir", tmp_path, "--energy-tol", "1e-8")
    assert code == 0
    payload = json.loads((tmp_path / "result.json").read_text())
    jsonschema.validate(payload, RESULT_SCHEMA)
    assert payload["method"] == "plain"
    assert payload["command"] == "vqe"
    assert payload["bond_length"] == pytest.approx(0.7909, abs=5e-5)  # from sidecar
    assert abs(payload["e_vqe"] - payload["e_fci"]) < 1.6e-3
    assert payload["status"] == "converged"

    with open(tmp_path / "results.csv", newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 1
    assert rows[0]["label"] == "02_0.7909"
    assert float(rows[0]["e_vqe"]) == pytest.approx(payload["e_vqe"], abs=1e-12)
    assert "e_vqe=" in capsys.readouterr().out


def test_vqe_sa_saf_records_drops(tmp_path):
    code = run_cli(
        "vqe", H2, "--out-dir", tmp_path, "--method", "sa-saf", "--energy-tol", "1e-8"
    )
    assert code == 0
    payload = json.loads((tmp_path / "result.json").read_text())
    jsonschema.validate(payload, RESULT_SCHEMA)
    assert payload["method"] == "sa-saf"
    assert payload["n_params_initial"] == 2
    assert payload["dropped_indices"]  # the Brillouin single goes
    assert payload["n_params_final"] < payload["n_params_initial"]
    assert abs(payload["s_squared"]) < 1e-8


def test_vqe_ml_writes_model(tmp_path):
    code = run_cli(
        "vqe", H2, "--out-dir", tmp_path, "--method", "ml",
        "--ml-n", 2, "--ml-fraction", 0.5, "--energy-tol", "1e-8",
    )
    assert code == 0
    payload = json.loads((tmp_path / "result.json").read_text())
    jsonschema.validate(payload, RESULT_SCHEMA)
    assert payload["method"] == "ml"
    assert "ml" in payload
    assert payload["ml"]["n_cycles"] >= 1
    if (tmp_path / "ml_model.json").exists():
        model = json.loads((tmp_path / "ml_model.json").read_text())
        assert model["kernel"] in ("linear", "poly")


# -- config merging ---------------------------------------------------------


def test_config_file_with_flag_precedence(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(
        "method: sa\n"
        "vqe:\n"
        "  energy_tol: 1.0e-4\n"
        "  kappa: 3\n"
        "ml:\n"
        "  lambda: 0.001\n"
    )
    parser = make_parser()
    args = parser.parse_args(["vqe", "x.fcidump", "--config", str(cfg)])
    config = build_config(args)
    assert config.method == "sa"
    assert config.vqe.energy_tol == 1e-4
    assert config.vqe.kappa == 3
    assert config.vqe.use_spin_adaptation

    args = parser.parse_args(
        ["vqe", "x.fcidump", "--config", str(cfg), "--method", "ml",
         "--energy-tol", "1e-7"]
    )
    config = build_config(args)
    assert config.method == "ml"
    assert config.vqe.energy_tol == 1e-7  # flag beats file
    assert config.vqe.kappa == 3  # file value survives for untouched keys
    assert config.ml.lam == 0.001  # YAML "lambda" maps onto lam


def test_invalid_configs_exit_1(tmp_path):
    bad_yaml = tmp_path / "bad.yaml"
    bad_yaml.write_text("method: [unclosed\n")
    assert run_cli("vqe", H2, "--config", bad_yaml) == 1

    not_mapping = tmp_path / "list.yaml"
    not_mapping.write_text("- just\n- a list\n")
    assert run_cli("vqe", H2, "--config", not_mapping) == 1

    bad_method = tmp_path / "method.yaml"
    bad_method.write_text("method: ccsd\n")
    assert run_cli("vqe", H2, "--config", bad_method) == 1

    bad_kappa = tmp_path / "kappa.yaml"
    bad_kappa.write_text("vqe:\n  kappa: 1\n")
    assert run_cli("vqe", H2, "--config", bad_kappa) == 1


def test_usage_errors_exit_1():
    with pytest.raises(SystemExit) as err:
        run_cli("vqe")  # missing positional
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        run_cli("optimize", "x.fcidump")  # unknown subcommand
    assert err.value.code == 1


# -- exit codes from the engine ---------------------------------------------


def test_missing_and_malformed_inputs_exit_1(tmp_path):
    assert run_cli("vqe", tmp_path / "nope.fcidump") == 1
    garbage = tmp_path / "garbage.fcidump"
    garbage.write_text("this is not an fcidump\n")
    assert run_cli("vqe", garbage) == 1


@pytest.mark.filterwarnings("ignore:orbital energies are not ascending")
def test_capacity_exit_2(tmp_path):
    big = tmp_path / "big.fcidump"
    save_fcidump(random_integrals(9, 2, seed=4), big)  # 18 qubits > engine cap
    assert run_cli("vqe", big, "--out-dir", tmp_path) == 2


def test_non_convergence_exit_3(tmp_path):
    cfg = tmp_path / "short.yaml"
    cfg.write_text("vqe:\n  max_iterations: 1\n")
    assert run_cli("vqe", H2, "--config", cfg, "--out-dir", tmp_path) == 3


# -- scan ---------------------------------------------------------------------


def make_manifest(tmp_path, rows):
    manifest = tmp_path / "manifest.csv"
    with open(manifest, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["label", "bond_length", "fcidump_path"])
        writer.writerows(rows)
    return manifest


def test_scan_two_methods_and_summary(tmp_path):
    h2_03 = sorted((DATA / "h2").glob("03_*.fcidump"))[0]
    manifest = make_manifest(
        tmp_path,
        [["h2", "0.7909", str(H2)], ["h2", f"{float(h2_03.stem.split('_')[1]):.4f}", str(h2_03)]],
    )
    out = tmp_path / "out"
    assert run_cli("scan", manifest, "--out-dir", out, "--energy-tol", "1e-8") == 0
    with open(out / "scan_plain.csv", newline="") as handle:
        plain_rows = list(csv.DictReader(handle))
    assert len(plain_rows) == 2
    summary = json.loads((out / "summary.json").read_text())
    jsonschema.validate(summary, SUMMARY_SCHEMA)
    assert all(abs(p["error_vs_fci"]) < 1.6e-3 for p in summary["points"])

    assert (
        run_cli("scan", manifest, "--method", "sa", "--out-dir", out,
                "--energy-tol", "1e-8")
        == 0
    )
    summary = json.loads((out / "summary.json").read_text())
    jsonschema.validate(summary, SUMMARY_SCHEMA)
    diffs = summary["comparisons"]["sa_minus_plain"]
    assert len(diffs) == 2
    assert all(abs(d["delta_e"]) <= 1e-4 for d in diffs)


def test_scan_label_filter_and_failures(tmp_path):
    manifest = make_manifest(
        tmp_path,
        [
            ["h2", "0.7909", str(H2)],
            ["broken", "1.0", str(tmp_path / "missing.fcidump")],
        ],
    )
    out = tmp_path / "out"
    # filtered to the good row only: success
    assert (
        run_cli("scan", manifest, "--only", "h2", "--out-dir", out,
                "--energy-tol", "1e-8")
        == 0
    )
    # unfiltered: the broken row is recorded and the exit code flips to 3
    assert run_cli("scan", manifest, "--out-dir", out, "--energy-tol", "1e-8") == 3
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["failures"]) == 1
    assert summary["failures"][0]["label"] == "broken"


def test_read_manifest_relative_paths_and_validation(tmp_path):
    manifest = make_manifest(tmp_path, [["h2", "0.7", "sub/file.fcidump"]])
    rows = read_manifest(manifest)
    assert rows[0]["fcidump_path"] == str(tmp_path / "sub" / "file.fcidump")

    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(Exception):
        read_manifest(bad)


# -- entropy and fci ----------------------------------------------------------


def test_entropy_report_with_freeze(tmp_path, capsys):
    code = run_cli("entropy", LIH, "--out-dir", tmp_path, "--freeze-k", 1)
    assert code == 0
    report = json.loads((tmp_path / "entropy.json").read_text())
    assert report["frozen_orbitals"] == [0]
    assert report["qubits_after"] == 10
    assert report["params_after"] == 24
    assert len(report["entropies"]) == 6
    with open(tmp_path / "entropy.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["bond_length", "orbital_index", "entropy", "source"]
    assert len(rows) == 7
    assert "freeze [0]" in capsys.readouterr().out


def test_entropy_report_without_freeze(tmp_path, capsys):
    code = run_cli("entropy", H2, "--out-dir", tmp_path, "--source", "fci")
    assert code == 0
    report = json.loads((tmp_path / "entropy.json").read_text())
    assert report["frozen_orbitals"] == []
    assert report["source"] == "fci"
    assert "params_after" not in report
    assert "no freeze recommendation" in capsys.readouterr().out


def test_fci_report(tmp_path):
    code = run_cli("fci", H2, "--out-dir", tmp_path)
    assert code == 0
    payload = json.loads((tmp_path / "fci.json").read_text())
    assert payload["e_fci"] == pytest.approx(-1.134924472209, abs=1e-9)
    assert payload["n_determinants"] <= 4
    assert payload["e_fci"] < payload["e_mp2"] < payload["e_hf"]
