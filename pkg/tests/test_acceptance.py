"""End-to-end acceptance gates over the committed FCIDUMP corpus.

Each test covers one release criterion and prints a single [PASS]/[FAIL]
verdict line to the real stdout (bypassing capture), so a full run doubles
as a one-line-per-criterion report. Corpus-wide VQE results are read
through tests/.acceptance_cache (see _acceptance_lib); fixture-level checks
recompute from scratch. The committed data under data/ is the only input:
nothing here imports or invokes the generator package.
"""

import importlib.metadata
import json
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

from uccprune.entropy import entropy_profile, select_frozen, single_orbital_rdm
from uccprune.fci import ci_to_statevector, fci_ground_state
from uccprune.fcidump import freeze_orbitals, load_fcidump
from uccprune.fermion import (
    ParameterMap,
    enumerate_excitations,
    jordan_wigner,
    number_operator,
    spin_adapt,
    sz_operator,
)
from uccprune.ml import fit, predict
from uccprune.pauli import PauliString, QubitOperator
from uccprune.refstate import hf_energy
from uccprune.simulator import (
    Statevector,
    UccsdProblem,
    apply_pauli_rotation,
    expectation,
)

from _acceptance_lib import EQUILIBRIUM_INDEX, corpus_rows, get_point
from _testlib import random_integrals

CHEM_ACC = 1.6e-3
FIVE_MOLECULES = ("h4_linear", "h4_ring", "h6", "lih", "h2o")
ALL_LABELS = ("h2",) + FIVE_MOLECULES

_POINTS = {}


def _point(row, method):
    key = (row["label"], row["index"], method)
    if key not in _POINTS:
        _POINTS[key] = get_point(row, method)
    return _POINTS[key]


# Verdict lines are collected here and replayed by a pytest_terminal_summary
# hook in conftest.py, so the per-criterion PASS/FAIL report survives output
# capture and always appears at the end of the run.
VERDICTS = []


def _report(name, ok, details=""):
    verdict = "PASS" if ok else "FAIL"
    line = f"[{verdict}] {name}" + (f": {details}" if details else "")
    VERDICTS.append(line)
    print(line, flush=True)
    assert ok, line


def _info(text):
    line = f"[INFO] {text}"
    VERDICTS.append(line)
    print(line, flush=True)


# -- 1: parameter and qubit counts ------------------------------------------


def test_h2o_parameter_and_qubit_counts():
    path = sorted(r["path"] for r in corpus_rows("h2o"))[4]
    ints = load_fcidump(path)
    got = []
    for k in range(3):
        active = freeze_orbitals(ints, list(range(k))) if k else ints
        excitations = enumerate_excitations(active.n_occ, active.n_virt)
        got.append((len(excitations), 2 * active.n_spatial))
    want = [(140, 14), (92, 12), (54, 10)]
    _report(
        "parameter/qubit counts under freezing",
        got == want,
        f"0/1/2 frozen -> {got}, want {want}",
    )


# -- 2: chemical accuracy vs exact diagonalization --------------------------


def test_chemical_accuracy_vs_fci():
    worst = {}
    for label in ("h2", "h4_linear", "lih"):
        errs = [
            abs(_point(r, "plain")["e_vqe"] - _point(r, "plain")["e_fci"])
            for r in corpus_rows(label)
        ]
        worst[label] = max(errs)
    ok = all(w < CHEM_ACC for w in worst.values())
    details = ", ".join(f"{k} max {v:.2e}" for k, v in worst.items())
    _report(f"chemical accuracy (<{CHEM_ACC:.1e})", ok, details)


# -- 3: spin adaptation fidelity --------------------------------------------


def test_spin_adaptation_fidelity():
    worst, where, violations = 0.0, "", []
    for label in ALL_LABELS:
        for r in corpus_rows(label):
            plain = _point(r, "plain")
            d = abs(_point(r, "sa")["e_vqe"] - plain["e_vqe"])
            if d > worst:
                worst, where = d, f"{label} {r['index']:02d}"
            if d > 1e-4:
                violations.append(
                    f"{label} {r['index']:02d} d={r['bond_length']:.2f}: "
                    f"gap={d:.2e} <S2>_plain={plain['s_squared']:+.1e}"
                )
    for line in violations:
        _info(f"sa fidelity violation: {line} (plain breaks spin symmetry)")
    _report(
        "spin adaptation fidelity (<=1e-4 everywhere)",
        worst <= 1e-4,
        f"worst |E(sa)-E(plain)| = {worst:.2e} at {where}; "
        f"{len(violations)} of 72 points above gate",
    )


# -- 4: filtration fidelity --------------------------------------------------


def _sa_param_excitation(path, param):
    """Spatial-orbital description of one spin-adapted parameter."""
    ints = load_fcidump(path)
    excitations = enumerate_excitations(ints.n_occ, ints.n_virt)
    pmap = spin_adapt(excitations, ints.n_spatial)
    m = ints.n_spatial
    for exc, row in zip(excitations, pmap.rows):
        if any(p == param for p, _ in row):
            occ = ",".join(str(o % m) for o in exc.occ)
            virt = ",".join(str(v % m) for v in exc.virt)
            kind = "single" if len(exc.occ) == 1 else "double"
            return f"{kind} {occ}->{virt}"
    return f"param {param}"


def _largest_dropped(row):
    """(magnitude, description) of the biggest unfiltered amplitude the
    filter dropped at this point, or None when nothing was dropped."""
    dropped = _point(row, "sa-saf")["dropped_indices"]
    if not dropped:
        return None
    theta = np.asarray(_point(row, "sa")["theta_final"])
    k = max(dropped, key=lambda i: abs(theta[i]))
    return abs(theta[k]), _sa_param_excitation(row["path"], k)


def test_filtration_fidelity():
    worst, where, worst_h2o, violations = 0.0, "", 0.0, []
    for label in ALL_LABELS:
        for r in corpus_rows(label):
            d = abs(_point(r, "sa-saf")["e_vqe"] - _point(r, "sa")["e_vqe"])
            if d > worst:
                worst, where = d, f"{label} {r['index']:02d}"
            if label == "h2o":
                worst_h2o = max(worst_h2o, d)
            if d > 1e-4:
                mag, desc = _largest_dropped(r)
                violations.append(
                    f"{label} {r['index']:02d} d={r['bond_length']:.2f}: gap={d:.2e}, "
                    f"biggest dropped amplitude |theta|={mag:.1e} ({desc})"
                )
    for line in violations:
        _info(f"saf fidelity violation: {line}")
    _report(
        "filtration fidelity (<=1e-4 everywhere)",
        worst <= 1e-4,
        f"worst |E(sa-saf)-E(sa)| = {worst:.2e} at {where}; h2o worst {worst_h2o:.2e}",
    )


# -- 5: filtration parameter reduction ---------------------------------------


def test_filtration_reduction_at_equilibrium():
    rows_out, ok = [], True
    for label in FIVE_MOLECULES:
        row = corpus_rows(label)[EQUILIBRIUM_INDEX[label]]
        n_plain = _point(row, "plain")["n_params_initial"]
        n_sa = _point(row, "sa")["n_params_final"]
        n_saf = _point(row, "sa-saf")["n_params_final"]
        r_sa, r_saf = n_sa / n_plain, n_saf / n_plain
        ok = ok and r_saf <= 0.35 and 0.40 <= r_sa <= 0.60
        rows_out.append(f"{label} {n_plain}->{n_sa}->{n_saf} ({r_sa:.2f}/{r_saf:.2f})")
    _report(
        "filtration reduction (sa-saf <=0.35x, sa in [0.40,0.60]x)",
        ok,
        "; ".join(rows_out),
    )


# -- 6: filtration safety -----------------------------------------------------


def test_filtration_safety():
    worst, where, violations = 0.0, "(nothing dropped)", []
    for label in FIVE_MOLECULES:
        for r in corpus_rows(label):
            dropped = _point(r, "sa-saf")["dropped_indices"]
            if not dropped:
                continue
            theta = np.asarray(_point(r, "sa")["theta_final"])
            mean = float(np.mean(np.abs(theta[dropped])))
            if mean > worst:
                worst, where = mean, f"{label} {r['index']:02d}"
            if mean >= 1e-4:
                mag, desc = _largest_dropped(r)
                violations.append(
                    f"{label} {r['index']:02d} d={r['bond_length']:.2f}: "
                    f"mean={mean:.2e} over {len(dropped)} dropped, dominated by "
                    f"|theta|={mag:.1e} ({desc})"
                )
    for line in violations:
        _info(f"saf safety violation: {line}")
    _report(
        "filtration safety (dropped stay <1e-4 in unfiltered run)",
        worst < 1e-4,
        f"worst mean |theta[dropped]| = {worst:.2e} at {where}",
    )


# -- 7: entropy-guided freezing ----------------------------------------------


def _expected_second_lowest(bond_length):
    if bond_length < 1.4:
        return 4
    if bond_length <= 1.5:
        return 3
    return 2


def test_entropy_freezing_profile():
    """H2O grid: core entropy tiny, virtuals dominate, regime labels, freeze error.

    The four sub-claims are asserted exactly as released; the per-point
    table is printed so any deviation is auditable point by point.
    """
    table, deltas = [], []
    s0_ok = top2_ok = regime_ok = True
    for r in corpus_rows("h2o"):
        ints = load_fcidump(r["path"])
        profile = entropy_profile(ints, source="mp2")
        s = profile.entropies
        d = r["bond_length"]

        p_s0 = s[0] < 1e-3 and s[0] <= 0.01 * s.max()
        top2 = set(int(i) for i in np.argsort(s)[-2:])
        p_top = top2 == {5, 6}
        occ_order = sorted(range(ints.n_occ), key=lambda p: s[p])
        second = occ_order[1]
        expect = _expected_second_lowest(d)
        p_reg = second == expect

        frozen = select_frozen(profile, k=1)
        e_full, _ = fci_ground_state(ints)
        e_frozen, _ = fci_ground_state(freeze_orbitals(ints, frozen))
        delta = abs(e_frozen - e_full)
        deltas.append(delta)

        s0_ok &= p_s0
        top2_ok &= p_top
        regime_ok &= p_reg
        table.append(
            f"  d={d:.4f}  S0={s[0]:.1e} ({'ok' if p_s0 else 'HIGH'})  "
            f"top2={sorted(top2)} ({'ok' if p_top else 'want [5, 6]'})  "
            f"2nd-lowest occ #{second} (want #{expect}{'' if p_reg else ', MISMATCH'})  "
            f"dFCI(k=1)={delta:.2e}"
        )
    deltas = np.asarray(deltas)
    freeze_ok = bool((deltas < CHEM_ACC).all() and (np.diff(deltas) < 0).all())

    for line in table:
        _info(line)
    ok = s0_ok and top2_ok and regime_ok and freeze_ok
    _report(
        "entropy freezing profile (h2o grid)",
        ok,
        f"S0 small: {s0_ok}; virtuals largest: {top2_ok}; "
        f"regime labels: {regime_ok}; freeze error bounded+decreasing: {freeze_ok}",
    )


# -- 8: regression-assisted optimization --------------------------------------


def test_ml_assisted_energies():
    diffs = []
    for r in corpus_rows("lih"):
        diffs.append(abs(_point(r, "ml")["e_vqe"] - _point(r, "sa-saf")["e_vqe"]))
    diffs = np.asarray(diffs)
    ok = bool((diffs <= 5e-4).all() and np.median(diffs) <= 2e-4)
    _report(
        "ml-assisted energies (each <=5e-4, median <=2e-4)",
        ok,
        f"max {diffs.max():.2e}, median {np.median(diffs):.2e}",
    )


def test_timing_report_not_gated():
    """Wall times are machine-dependent; reported for the record only."""
    stretched = [r for r in corpus_rows("h2o") if r["index"] >= 8]
    t_plain = np.mean([_point(r, "plain")["wall_time_s"] for r in stretched])
    t_saf = np.mean([_point(r, "sa-saf")["wall_time_s"] for r in stretched])
    total = sum(
        _point(r, m)["wall_time_s"]
        for label in ALL_LABELS
        for r in corpus_rows(label)
        for m in ("plain", "sa", "sa-saf")
    )
    soft_ok = t_saf < t_plain
    _report(
        "timing reported (speed not gated)",
        True,
        f"h2o stretched mean plain {t_plain:.1f}s vs sa-saf {t_saf:.1f}s "
        f"(soft expectation sa-saf faster: {'met' if soft_ok else 'NOT met'}); "
        f"corpus total {total / 60:.1f} min",
    )


# -- 9: always-on property bundle ---------------------------------------------


def _dense_orbital_rdm(amps, m, p):
    # explicit partial trace; local basis empty/up/down/updown
    rho = np.zeros((4, 4), dtype=complex)
    clear = ~((1 << p) | (1 << (p + m)))
    for b in range(1 << (2 * m)):
        s = (b >> p) & 1 | ((b >> (p + m)) & 1) << 1
        base = b & clear
        for s2 in range(4):
            b2 = base | (s2 & 1) << p | (s2 >> 1) << (p + m)
            rho[s, s2] += amps[b] * np.conj(amps[b2])
    return rho


def test_property_suite_bundle():
    checks = []

    ints = random_integrals(2, 2, seed=11)
    excitations = enumerate_excitations(ints.n_occ, ints.n_virt)
    problem = UccsdProblem(ints, excitations, spin_adapt(excitations, ints.n_spatial))
    rng = np.random.default_rng(2)
    theta = rng.normal(scale=0.2, size=problem.n_parameters)
    state = problem.prepare(theta)
    checks.append(("norm 1e-10", abs(state.norm() - 1.0) < 1e-10))

    n_dev = abs(expectation(state, number_operator(problem.n_qubits)) - ints.n_electrons)
    sz_dev = abs(expectation(state, sz_operator(ints.n_spatial)))
    checks.append(("N/Sz conservation 1e-10", n_dev < 1e-10 and sz_dev < 1e-10))

    viol = 0.0
    for label in ALL_LABELS:
        for r in corpus_rows(label):
            methods = ("plain", "sa", "sa-saf") + (("ml",) if label == "lih" else ())
            for m in methods:
                rec = _point(r, m)
                viol = max(viol, rec["e_fci"] - rec["e_vqe"])
    checks.append(("variational bound 1e-10 (full corpus)", viol < 1e-10))

    jw_ok = True
    for p in range(4):
        for q in range(4):
            ap, aq = jordan_wigner(((p, False),)), jordan_wigner(((q, False),))
            aq_dag = jordan_wigner(((q, True),))
            mixed = (ap @ aq_dag + aq_dag @ ap).compress()
            plain = (ap @ aq + aq @ ap).compress()
            jw_ok &= len(plain) == 0
            if p == q:
                jw_ok &= len(mixed) == 1 and mixed.terms.get(PauliString(0, 0)) == 1.0
            else:
                jw_ok &= len(mixed) == 0
    checks.append(("JW anticommutators exact", bool(jw_ok)))

    rot_ok = True
    rng = np.random.default_rng(5)
    for _ in range(4):
        amps = rng.normal(size=8) + 1j * rng.normal(size=8)
        sv = Statevector(3, amps / np.linalg.norm(amps))
        p = PauliString(int(rng.integers(8)), int(rng.integers(8)))
        angle = float(rng.uniform(-np.pi, np.pi))
        dense = expm(1j * angle * p.to_matrix(3)) @ sv.amplitudes
        out = apply_pauli_rotation(sv, p, angle)
        rot_ok &= bool(np.max(np.abs(out.amplitudes - dense)) < 1e-12)
    checks.append(("Pauli rotation vs expm 1e-12", rot_ok))

    rdm_ok = True
    for m, ne, seed in ((2, 2, 3), (4, 4, 11)):
        _, ci = fci_ground_state(random_integrals(m, ne, seed=seed))
        amps = ci_to_statevector(ci, m).amplitudes
        for p in range(m):
            rho = _dense_orbital_rdm(amps, m, p)
            rdm = single_orbital_rdm(ci, p)
            rdm_ok &= bool(np.allclose(rho, np.diag(rdm.probs), atol=1e-12))
    checks.append(("RDM vs partial trace 1e-12", rdm_ok))

    rng = np.random.default_rng(8)
    x = rng.normal(size=(6, 3))
    y = rng.normal(size=(6, 2))
    lam = 1e-3
    model = fit(x, y, kernel="linear", lam=lam)
    x_new = rng.normal(size=(4, 3))
    primal = x_new @ np.linalg.solve(x.T @ x + lam * np.eye(3), x.T @ y)
    checks.append(
        ("primal-dual equivalence 1e-10",
         bool(np.max(np.abs(predict(model, x_new) - primal)) < 1e-10))
    )

    theta = np.random.default_rng(9).normal(scale=0.15, size=problem.n_parameters)
    _, g_h = problem.energy_and_gradient(theta, mode="fd", fd_step=2e-5)
    _, g_half = problem.energy_and_gradient(theta, mode="fd", fd_step=1e-5)
    checks.append(("FD step-halving 1e-5", bool(np.max(np.abs(g_h - g_half)) < 1e-5)))

    failed = [name for name, ok in checks if not ok]
    _report(
        "property suite bundle",
        not failed,
        f"{len(checks)} checks" + (f"; failed: {', '.join(failed)}" if failed else ""),
    )


# -- committed corpus stands alone --------------------------------------------


def test_committed_corpus_stands_alone():
    """Fixture-level gate: the data ships with the repository and parses
    without the generator package being importable."""
    problems = []

    try:
        importlib.metadata.distribution("molgen")
        problems.append("generator package installed in the test environment")
    except importlib.metadata.PackageNotFoundError:
        pass
    # the engine and its tests must consume the corpus files only; any
    # source-level reference to the generator breaks the interface boundary
    here = Path(__file__)
    for src in sorted(here.parent.glob("*.py")) + sorted(
        (here.parents[1] / "src" / "uccprune").rglob("*.py")
    ):
        if src == here:
            continue
        if "molgen" in src.read_text():
            problems.append(f"{src.name} references the generator package")

    by_label = {label: corpus_rows(label) for label in ALL_LABELS}
    for label, rows in by_label.items():
        if len(rows) != 12:
            problems.append(f"{label}: {len(rows)} points, want 12")
        lengths = [r["bond_length"] for r in rows]
        if not all(b > a for a, b in zip(lengths, lengths[1:])):
            problems.append(f"{label}: grid not strictly increasing")

    worst_hf = 0.0
    for label, rows in by_label.items():
        for r in rows:
            ints = load_fcidump(r["path"])
            meta = json.loads(r["path"].with_suffix(".meta.json").read_text())
            worst_hf = max(worst_hf, abs(hf_energy(ints) - meta["e_hf"]))
            if label == "h2o" and ints.n_spatial != 7:
                problems.append(f"h2o {r['index']:02d}: NORB {ints.n_spatial} != 7")
            if label == "lih" and ints.n_spatial != 6:
                problems.append(f"lih {r['index']:02d}: NORB {ints.n_spatial} != 6")
    if worst_hf > 1e-8:
        problems.append(f"HF vs sidecar worst {worst_hf:.2e} > 1e-8")

    _report(
        "committed corpus stands alone",
        not problems,
        "; ".join(problems) or f"72 fixtures, HF vs sidecar worst {worst_hf:.2e}",
    )
