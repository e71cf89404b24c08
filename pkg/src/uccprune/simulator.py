"""Dense statevector engine for the UCCSD ansatz.

States are dense complex128 vectors of length 2^n with qubit q on bit q
of the basis index; qubit q holds spin orbital q of the block convention.
A single first-order Trotter step is used: excitation factors are applied
in the fixed enumeration order (doubles then singles), and each factor is
exact because the Pauli terms of one generator mutually commute.

The engine is capped at 16 qubits; larger requests raise CapacityError.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as kernels
from .errors import CapacityError, ContractViolation
from .fcidump import IntegralSet
from .fermion import (
    ParameterMap,
    build_qubit_hamiltonian,
    generator_for,
    s_squared_operator,
)
from .pauli import QubitOperator

CAPACITY = 16

_PHASE = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


class Statevector:
    """Dense normalized state over n_qubits."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray):
        if n_qubits > CAPACITY:
            raise CapacityError(f"{n_qubits} qubits exceeds the {CAPACITY}-qubit engine cap")
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << n_qubits,):
            raise ValueError(f"amplitude vector has shape {amplitudes.shape}")
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self):
        return f"Statevector({self.n_qubits} qubits)"


def init_reference(n_qubits: int, occupied) -> Statevector:
    """Computational basis state with the given qubits set."""
    occupied = sorted(set(int(q) for q in occupied))
    if occupied and not (0 <= occupied[0] and occupied[-1] < n_qubits):
        raise ValueError(f"occupied indices {occupied} out of range for {n_qubits} qubits")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[sum(1 << q for q in occupied)] = 1.0
    return Statevector(n_qubits, amps)


def apply_pauli_rotation(state: Statevector, p, angle: float) -> Statevector:
    """In-place exp(i * angle * P); returns the mutated state."""
    xs = np.array([p.x], dtype=np.int64)
    zs = np.array([p.z], dtype=np.int64)
    jps = np.array([p.phase_exponent], dtype=np.int8)
    kernels.rotate_paulis(state.amplitudes, xs, zs, jps, np.array([float(angle)]))
    return state


def _term_arrays(op: QubitOperator):
    """Split an operator into (xs, zs, jps, coeffs) with i**jp folded in."""
    n = len(op.terms)
    xs = np.empty(n, dtype=np.int64)
    zs = np.empty(n, dtype=np.int64)
    jps = np.empty(n, dtype=np.int8)
    coeffs = np.empty(n, dtype=np.complex128)
    for k, (p, c) in enumerate(op.terms.items()):
        xs[k] = p.x
        zs[k] = p.z
        jp = p.phase_exponent
        jps[k] = jp
        coeffs[k] = c * _PHASE[jp]
    return xs, zs, jps, coeffs


def expectation(state: Statevector, op: QubitOperator) -> float:
    """<psi| op |psi> for a Hermitian operator."""
    if not op.is_hermitian():
        raise ContractViolation("expectation requires a Hermitian operator")
    psi = state.amplitudes
    acc = 0.0 + 0.0j
    for p, c in op.terms.items():
        raw = kernels.pauli_expectation(psi, p.x, p.z)
        acc += c * _PHASE[p.phase_exponent] * raw
    assert abs(acc.imag) < 1e-10, f"imaginary residue {acc.imag} in expectation"
    return float(acc.real)


def apply_operator(state: Statevector, op: QubitOperator) -> Statevector:
    """op |psi> as a new (generally unnormalized) vector."""
    xs, zs, _, coeffs = _term_arrays(op)
    out = np.zeros_like(state.amplitudes)
    kernels.pauli_action(state.amplitudes, out, xs, zs, coeffs)
    return Statevector(state.n_qubits, out)


class GroupedOperator:
    """Hermitian operator grouped by X-mask for fast dense evaluation.

    Each Pauli term X^x Z^z maps basis state |b> to a phase times |b^x>,
    so all terms sharing an x-mask form one XOR-diagonal D_x[b]. For
    Hamiltonians that are real symmetric matrices (real molecular
    integrals) every D_x is real, which is asserted during construction.
    """

    __slots__ = ("n_qubits", "xs", "diags")

    def __init__(self, n_qubits, xs, diags):
        self.n_qubits = n_qubits
        self.xs = xs
        self.diags = diags

    @classmethod
    def from_operator(cls, op: QubitOperator, n_qubits: int) -> "GroupedOperator":
        if not op.is_hermitian():
            raise ContractViolation("grouping requires a Hermitian operator")
        dim = 1 << n_qubits
        iota = np.arange(dim, dtype=np.int64)
        rows: dict[int, np.ndarray] = {}
        for p, c in op.terms.items():
            row = rows.get(p.x)
            if row is None:
                row = rows[p.x] = np.zeros(dim, dtype=np.complex128)
            sign = 1.0 - 2.0 * ((np.bitwise_count(iota & p.z) & 1).astype(np.float64))
            row += (c * _PHASE[p.phase_exponent]) * sign
        xs = np.array(sorted(rows), dtype=np.int64)
        diags = np.empty((len(xs), dim), dtype=np.float64)
        for g, x in enumerate(xs):
            row = rows[int(x)]
            err = float(np.max(np.abs(row.imag))) if len(row) else 0.0
            if err > 1e-10:
                raise ContractViolation(f"operator is not real in the computational basis ({err})")
            diags[g] = row.real
        return cls(n_qubits, xs, diags)

    def expectation(self, state: Statevector) -> float:
        val = kernels.xor_diag_expectation(state.amplitudes, self.xs, self.diags)
        assert abs(val.imag) < 1e-9, f"imaginary residue {val.imag} in grouped expectation"
        return float(val.real)

    def apply(self, state: Statevector) -> np.ndarray:
        out = np.zeros_like(state.amplitudes)
        kernels.xor_diag_action(state.amplitudes, out, self.xs, self.diags)
        return out


class UccsdAnsatz:
    """Precompiled rotation program for one excitation list.

    Each generator tau - tau+ expands to Pauli terms i*g_P*P with real
    g_P; exp(amp * (tau - tau+)) is the exact product of rotations
    exp(i * (amp * g_P) * P). The rotations of the whole product are
    concatenated into flat arrays for the kernels.
    """

    __slots__ = ("n_qubits", "excitations", "pmap", "xs", "zs", "jps", "gcoef", "rot_exc")

    def __init__(self, n_qubits: int, excitations, pmap: ParameterMap):
        if len(pmap) != len(excitations):
            raise ValueError("parameter map rows do not match the excitation list")
        self.n_qubits = n_qubits
        self.excitations = list(excitations)
        self.pmap = pmap
        xs, zs, jps, gcoef, rot_exc = [], [], [], [], []
        for k, exc in enumerate(self.excitations):
            gen = generator_for(exc)
            if not gen.is_anti_hermitian():
                raise ContractViolation(f"{exc!r} generator is not anti-Hermitian")
            for p, c in gen.terms.items():
                xs.append(p.x)
                zs.append(p.z)
                jps.append(p.phase_exponent)
                gcoef.append(c.imag)
                rot_exc.append(k)
        self.xs = np.array(xs, dtype=np.int64)
        self.zs = np.array(zs, dtype=np.int64)
        self.jps = np.array(jps, dtype=np.int8)
        self.gcoef = np.array(gcoef, dtype=np.float64)
        self.rot_exc = np.array(rot_exc, dtype=np.int64)

    @property
    def n_rotations(self) -> int:
        return len(self.xs)

    def angles(self, theta: np.ndarray) -> np.ndarray:
        amps = self.pmap.amplitudes(theta)
        return amps[self.rot_exc] * self.gcoef

    def apply(self, psi: np.ndarray, theta: np.ndarray):
        kernels.rotate_paulis(psi, self.xs, self.zs, self.jps, self.angles(theta))

    def prepare(self, ref: Statevector, theta: np.ndarray) -> Statevector:
        out = ref.copy()
        self.apply(out.amplitudes, theta)
        return out


def prepare_uccsd(ref: Statevector, excitations, pmap: ParameterMap, theta) -> Statevector:
    """Single Trotter step of the UCCSD product ansatz from ref."""
    theta = np.asarray(theta, dtype=np.float64)
    ansatz = UccsdAnsatz(ref.n_qubits, excitations, pmap)
    return ansatz.prepare(ref, theta)


class UccsdProblem:
    """Hamiltonian, reference, and ansatz bundled for one molecule.

    Builds the qubit Hamiltonian once, groups it for fast evaluation, and
    precompiles the rotation program. The gradient comes either from
    central finite differences (step fd_step) or from an exact adjoint
    sweep at roughly three state preparations per call.
    """

    def __init__(self, integrals: IntegralSet, excitations, pmap: ParameterMap):
        n_qubits = integrals.n_qubits
        if n_qubits > CAPACITY:
            raise CapacityError(f"{n_qubits} qubits exceeds the {CAPACITY}-qubit engine cap")
        m = integrals.n_spatial
        o = integrals.n_occ
        self.integrals = integrals
        self.n_qubits = n_qubits
        self.occupied = list(range(o)) + [m + i for i in range(o)]
        self.reference = init_reference(n_qubits, self.occupied)
        self.hamiltonian = build_qubit_hamiltonian(integrals)
        self.grouped = GroupedOperator.from_operator(self.hamiltonian, n_qubits)
        self.ansatz = UccsdAnsatz(n_qubits, excitations, pmap)
        self._s2 = None

    @property
    def excitations(self):
        return self.ansatz.excitations

    @property
    def pmap(self) -> ParameterMap:
        return self.ansatz.pmap

    @property
    def n_parameters(self) -> int:
        return self.ansatz.pmap.n_independent

    def prepare(self, theta) -> Statevector:
        return self.ansatz.prepare(self.reference, np.asarray(theta, dtype=np.float64))

    def energy(self, theta) -> float:
        return self.grouped.expectation(self.prepare(theta))

    def energy_and_gradient(self, theta, mode: str = "adjoint", fd_step: float = 1e-6):
        theta = np.asarray(theta, dtype=np.float64)
        if mode == "adjoint":
            return self._adjoint(theta)
        if mode == "fd":
            return self.energy(theta), self._fd_gradient(theta, fd_step)
        raise ValueError(f"unknown gradient mode {mode!r}")

    def _fd_gradient(self, theta, step):
        grad = np.empty_like(theta)
        for k in range(len(theta)):
            probe = theta.copy()
            probe[k] = theta[k] + step
            e_plus = self.energy(probe)
            probe[k] = theta[k] - step
            e_minus = self.energy(probe)
            grad[k] = (e_plus - e_minus) / (2.0 * step)
        return grad

    def _adjoint(self, theta):
        """Exact gradient by reverse sweep.

        With |f_m> the state after rotation m and <b_m| = <psi|H after
        unwinding rotations above m, dE/dphi_m = -2 Im <b_m|P_m|f_m>; the
        chain rule through the amplitude map gives dE/dtheta.
        """
        ansatz = self.ansatz
        angles = ansatz.angles(theta)
        psi = self.reference.copy()
        kernels.rotate_paulis(psi.amplitudes, ansatz.xs, ansatz.zs, ansatz.jps, angles)
        hpsi = self.grouped.apply(psi)
        energy = float(np.vdot(psi.amplitudes, hpsi).real)

        f = psi.amplitudes
        b = hpsi
        tmp = np.empty_like(f)
        grad_phi = np.empty(ansatz.n_rotations)
        coeff = np.empty(1, dtype=np.complex128)
        neg = np.empty(1, dtype=np.float64)
        for mm in range(ansatz.n_rotations - 1, -1, -1):
            tmp[:] = 0.0
            coeff[0] = _PHASE[int(ansatz.jps[mm])]
            kernels.pauli_action(f, tmp, ansatz.xs[mm : mm + 1], ansatz.zs[mm : mm + 1], coeff)
            grad_phi[mm] = -2.0 * float(np.vdot(b, tmp).imag)
            neg[0] = -angles[mm]
            kernels.rotate_paulis(
                f, ansatz.xs[mm : mm + 1], ansatz.zs[mm : mm + 1], ansatz.jps[mm : mm + 1], neg
            )
            kernels.rotate_paulis(
                b, ansatz.xs[mm : mm + 1], ansatz.zs[mm : mm + 1], ansatz.jps[mm : mm + 1], neg
            )
        d_amp = np.zeros(len(ansatz.excitations))
        np.add.at(d_amp, ansatz.rot_exc, ansatz.gcoef * grad_phi)
        return energy, ansatz.pmap.project_gradient(d_amp)

    def s_squared(self, theta) -> float:
        if self._s2 is None:
            self._s2 = s_squared_operator(self.integrals.n_spatial)
        return expectation(self.prepare(theta), self._s2)


def energy_and_gradient(problem: UccsdProblem, theta, step: float = 1e-6):
    """Energy plus central finite-difference gradient (step h per component)."""
    return problem.energy_and_gradient(theta, mode="fd", fd_step=step)
