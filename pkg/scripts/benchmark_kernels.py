"""Benchmark the compiled statevector kernels against the numpy fallback.

Two layers:

* micro: every kernel on synthetic workloads at a few qubit counts, timed
  in-process by calling the two backend modules directly; outputs also get
  cross-checked so the run doubles as an agreement test.
* macro: one full UCCSD energy-plus-gradient evaluation on a corpus
  FCIDUMP per backend. Backend selection happens at import time, so each
  measurement runs in a subprocess with UCCPRUNE_KERNELS set.

Usage:
    PYTHONPATH=src python3 scripts/benchmark_kernels.py
    PYTHONPATH=src python3 scripts/benchmark_kernels.py --fcidump data/h2o/04_1.0318.fcidump
"""

from __future__ import annotations

import argparse
import os
import pathlib
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from uccprune._kernels import fallback  # noqa: E402

try:
    from uccprune._kernels import _core as compiled
except ImportError:
    compiled = None

N_STRINGS = 100
N_GROUPS = 16
REPEATS = 5


def _random_state(rng, n_qubits):
    psi = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    psi /= np.linalg.norm(psi)
    return psi.astype(np.complex128)


def _random_strings(rng, n_qubits, count):
    xs = rng.integers(0, 1 << n_qubits, size=count).astype(np.int64)
    zs = rng.integers(0, 1 << n_qubits, size=count).astype(np.int64)
    jps = (np.bitwise_count(xs & zs) & 3).astype(np.int8)
    return xs, zs, jps


def _best_of(func, repeats=REPEATS):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = func()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _micro_cases(rng, n_qubits):
    """One synthetic workload per kernel; returns (name, runner) pairs.

    Each runner takes a backend module and returns something comparable
    across backends, so timing and agreement use the same call.
    """
    psi = _random_state(rng, n_qubits)
    xs, zs, jps = _random_strings(rng, n_qubits, N_STRINGS)
    angles = rng.normal(scale=0.1, size=N_STRINGS)
    coeffs = (rng.normal(size=N_STRINGS) + 1j * rng.normal(size=N_STRINGS)).astype(np.complex128)
    gxs = rng.integers(0, 1 << n_qubits, size=N_GROUPS).astype(np.int64)
    diags = rng.normal(size=(N_GROUPS, 1 << n_qubits))

    def rotate(mod):
        work = psi.copy()
        mod.rotate_paulis(work, xs, zs, jps, angles)
        return work

    def action(mod):
        out = np.zeros_like(psi)
        mod.pauli_action(psi, out, xs, zs, coeffs)
        return out

    def expectation(mod):
        return np.array([mod.pauli_expectation(psi, int(x), int(z)) for x, z in zip(xs, zs)])

    def xdiag_action(mod):
        out = np.zeros_like(psi)
        mod.xor_diag_action(psi, out, gxs, diags)
        return out

    def xdiag_expectation(mod):
        return mod.xor_diag_expectation(psi, gxs, diags)

    return [
        (f"rotate_paulis        ({N_STRINGS} strings)", rotate),
        (f"pauli_action         ({N_STRINGS} strings)", action),
        (f"pauli_expectation    ({N_STRINGS} strings)", expectation),
        (f"xor_diag_action      ({N_GROUPS} groups)", xdiag_action),
        (f"xor_diag_expectation ({N_GROUPS} groups)", xdiag_expectation),
    ]


def run_micro(qubit_counts):
    rng = np.random.default_rng(11)
    print("== micro: per-kernel timings (best of %d) ==" % REPEATS)
    header = f"{'kernel':38s} {'qubits':>6s} {'numpy':>10s} {'compiled':>10s} {'speedup':>8s}"
    print(header)
    worst_dev = 0.0
    for n in qubit_counts:
        for name, runner in _micro_cases(rng, n):
            t_np, out_np = _best_of(lambda: runner(fallback))
            t_c, out_c = _best_of(lambda: runner(compiled))
            dev = float(np.max(np.abs(np.asarray(out_np) - np.asarray(out_c))))
            worst_dev = max(worst_dev, dev)
            print(
                f"{name:38s} {n:6d} {t_np * 1e3:9.2f}ms {t_c * 1e3:9.2f}ms "
                f"{t_np / t_c:7.1f}x"
            )
    print(f"backend agreement: max |numpy - compiled| = {worst_dev:.2e}")
    return worst_dev


_MACRO_SNIPPET = """
import sys, time
sys.path.insert(0, {src!r})
import numpy as np
import uccprune._kernels as k
from uccprune.fcidump import load_fcidump
from uccprune.vqe import build_problem

ints = load_fcidump({path!r})
prob = build_problem(ints, True)
rng = np.random.default_rng(3)
theta = rng.normal(scale=0.02, size=prob.n_parameters)
prob.energy_and_gradient(theta)  # warm up caches
best = min(
    (lambda t0: (prob.energy_and_gradient(theta), time.perf_counter() - t0)[1])(time.perf_counter())
    for _ in range({repeats})
)
e, g = prob.energy_and_gradient(theta)
print(f"{{k.BACKEND}} {{best:.6f}} {{e:.10f}} {{np.max(np.abs(g)):.10f}}")
"""


def run_macro(fcidump, repeats):
    src = str(pathlib.Path(__file__).resolve().parents[1] / "src")
    print(f"\n== macro: energy+gradient on {fcidump} (best of {repeats}) ==")
    results = {}
    for backend in ("numpy", "compiled"):
        env = dict(os.environ, UCCPRUNE_KERNELS=backend, PYTHONPATH=src)
        snippet = _MACRO_SNIPPET.format(src=src, path=str(fcidump), repeats=repeats)
        proc = subprocess.run(
            [sys.executable, "-c", snippet], env=env, capture_output=True, text=True
        )
        if proc.returncode != 0:
            print(f"{backend}: FAILED\n{proc.stderr.strip()}")
            continue
        name, seconds, energy, gmax = proc.stdout.split()
        results[name] = float(seconds)
        print(f"{name:>8s}: {float(seconds) * 1e3:8.1f} ms   E={energy}  max|g|={gmax}")
    if len(results) == 2:
        print(f" speedup: {results['numpy'] / results['compiled']:.1f}x")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default = pathlib.Path(__file__).resolve().parents[1] / "data" / "h2o"
    ap.add_argument(
        "--fcidump",
        type=pathlib.Path,
        default=sorted(default.glob("04_*.fcidump"))[0] if default.is_dir() else None,
        help="FCIDUMP for the macro benchmark (default: h2o equilibrium point)",
    )
    ap.add_argument("--qubits", type=int, nargs="*", default=[8, 12, 14])
    ap.add_argument("--repeats", type=int, default=3, help="macro repeats")
    args = ap.parse_args(argv)

    if compiled is None:
        print("compiled extension not built; only the numpy fallback is available.")
        print("build it with: pip install -e . --no-build-isolation")
        return 1
    dev = run_micro(args.qubits)
    if args.fcidump is not None:
        run_macro(args.fcidump, args.repeats)
    return 0 if dev < 1e-10 else 1


if __name__ == "__main__":
    raise SystemExit(main())
