"""Statevector engine and UCCSD ansatz against dense linear algebra."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from uccprune.errors import CapacityError, ContractViolation
from uccprune.fermion import (
    enumerate_excitations,
    generator_for,
    number_operator,
    spin_adapt,
    sz_operator,
)
from uccprune.pauli import PauliString, QubitOperator
from uccprune.refstate import hf_energy
from uccprune.simulator import (
    CAPACITY,
    GroupedOperator,
    Statevector,
    UccsdProblem,
    apply_operator,
    apply_pauli_rotation,
    energy_and_gradient,
    expectation,
    init_reference,
    prepare_uccsd,
)

from _testlib import random_integrals


def random_state(n_qubits, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    amps /= np.linalg.norm(amps)
    return Statevector(n_qubits, amps)


def random_hermitian_op(n_qubits, n_terms, seed):
    """Real combination of Pauli strings: Hermitian by construction."""
    rng = np.random.default_rng(seed)
    op = QubitOperator.zero()
    for _ in range(n_terms):
        x = int(rng.integers(1 << n_qubits))
        z = int(rng.integers(1 << n_qubits))
        op += QubitOperator.from_term(PauliString(x, z), float(rng.normal()))
    return op.compress()


def small_problem(seed=7, adapted=False):
    ints = random_integrals(2, 2, seed=seed)
    excitations = enumerate_excitations(ints.n_occ, ints.n_virt)
    if adapted:
        pmap = spin_adapt(excitations, ints.n_spatial)
    else:
        from uccprune.fermion import ParameterMap

        pmap = ParameterMap.identity(len(excitations))
    return UccsdProblem(ints, excitations, pmap)


# -- state primitives -------------------------------------------------------


def test_init_reference():
    state = init_reference(4, [0, 2])
    assert state.norm() == 1.0
    assert state.amplitudes[0b0101] == 1.0
    with pytest.raises(ValueError):
        init_reference(3, [3])


def test_capacity_cap():
    with pytest.raises(CapacityError):
        Statevector(CAPACITY + 1, np.zeros(2 ** (CAPACITY + 1), dtype=complex))


@given(x=st.integers(0, 7), z=st.integers(0, 7), seed=st.integers(0, 99))
@settings(max_examples=25, deadline=None)
def test_rotation_matches_dense_exponential(x, z, seed):
    p = PauliString(x, z)
    rng = np.random.default_rng(seed)
    angle = float(rng.uniform(-np.pi, np.pi))
    state = random_state(3, seed)
    dense = expm(1j * angle * p.to_matrix(3)) @ state.amplitudes
    out = apply_pauli_rotation(state.copy(), p, angle)
    assert np.allclose(out.amplitudes, dense, atol=1e-12)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)


def test_expectation_matches_dense():
    op = random_hermitian_op(3, 6, seed=2)
    state = random_state(3, 12)
    mat = op.to_matrix(3)
    want = np.vdot(state.amplitudes, mat @ state.amplitudes).real
    assert expectation(state, op) == pytest.approx(want, abs=1e-12)


def test_expectation_rejects_non_hermitian():
    op = QubitOperator.from_term(PauliString(1, 0), 1j)
    with pytest.raises(ContractViolation):
        expectation(random_state(2, 0), op)


def test_apply_operator_matches_dense():
    op = random_hermitian_op(3, 5, seed=4)
    state = random_state(3, 9)
    out = apply_operator(state, op)
    assert np.allclose(out.amplitudes, op.to_matrix(3) @ state.amplitudes, atol=1e-12)


# -- grouped operator -------------------------------------------------------


def test_grouped_operator_matches_dense():
    ints = random_integrals(2, 2, seed=3)
    from uccprune.fermion import build_qubit_hamiltonian

    h = build_qubit_hamiltonian(ints)
    grouped = GroupedOperator.from_operator(h, 4)
    mat = h.to_matrix(4)
    state = random_state(4, 5)
    assert np.allclose(grouped.apply(state), mat @ state.amplitudes, atol=1e-12)
    want = np.vdot(state.amplitudes, mat @ state.amplitudes).real
    assert grouped.expectation(state) == pytest.approx(want, abs=1e-12)


def test_grouped_operator_contracts():
    with pytest.raises(ContractViolation):
        GroupedOperator.from_operator(QubitOperator.from_term(PauliString(1, 0), 1j), 2)
    # Hermitian but imaginary in the computational basis: a lone Y
    y = QubitOperator.from_term(PauliString(1, 1), 1.0)
    assert y.is_hermitian()
    with pytest.raises(ContractViolation):
        GroupedOperator.from_operator(y, 2)


# -- ansatz -----------------------------------------------------------------


def test_prepare_identity_at_zero():
    ints = random_integrals(2, 2, seed=1)
    excitations = enumerate_excitations(1, 1)
    from uccprune.fermion import ParameterMap

    pmap = ParameterMap.identity(len(excitations))
    ref = init_reference(4, [0, 2])
    out = prepare_uccsd(ref, excitations, pmap, np.zeros(len(excitations)))
    assert np.allclose(out.amplitudes, ref.amplitudes, atol=1e-15)


def test_prepare_matches_dense_product():
    """One Trotter step is the ordered product of exact factor exponentials."""
    from uccprune.fermion import ParameterMap

    excitations = enumerate_excitations(1, 1)
    pmap = ParameterMap.identity(len(excitations))
    rng = np.random.default_rng(8)
    theta = rng.normal(scale=0.3, size=len(excitations))
    ref = init_reference(4, [0, 2])

    dense = ref.amplitudes.copy()
    for exc, amp in zip(excitations, theta):
        dense = expm(amp * generator_for(exc).to_matrix(4)) @ dense

    out = prepare_uccsd(ref, excitations, pmap, theta)
    assert np.allclose(out.amplitudes, dense, atol=1e-12)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)


def test_double_excitation_factor_is_exact_exponential():
    """All Pauli terms of one generator commute, so the product is exp."""
    excitations = [e for e in enumerate_excitations(2, 2) if e.kind == "double"]
    exc = excitations[0]
    from uccprune.fermion import ParameterMap

    ref = init_reference(8, [0, 1, 4, 5])
    amp = 0.37
    dense = expm(amp * generator_for(exc).to_matrix(8)) @ ref.amplitudes
    out = prepare_uccsd(ref, [exc], ParameterMap.identity(1), np.array([amp]))
    assert np.allclose(out.amplitudes, dense, atol=1e-12)


def test_norm_and_symmetries_conserved():
    problem = small_problem(seed=11, adapted=True)
    rng = np.random.default_rng(2)
    theta = rng.normal(scale=0.2, size=problem.n_parameters)
    state = problem.prepare(theta)
    assert abs(state.norm() - 1.0) < 1e-10

    n_op = number_operator(problem.n_qubits)
    sz_op = sz_operator(problem.integrals.n_spatial)
    assert expectation(state, n_op) == pytest.approx(
        problem.integrals.n_electrons, abs=1e-10
    )
    assert expectation(state, sz_op) == pytest.approx(0.0, abs=1e-10)
    assert problem.s_squared(np.zeros(problem.n_parameters)) == pytest.approx(
        0.0, abs=1e-10
    )


# -- problem / gradients ----------------------------------------------------


def test_energy_at_zero_is_hf():
    for seed in (5, 23):
        problem = small_problem(seed=seed)
        e0 = problem.energy(np.zeros(problem.n_parameters))
        assert e0 == pytest.approx(hf_energy(problem.integrals), abs=1e-10)


def test_energy_bounded_by_dense_ground_state():
    problem = small_problem(seed=13)
    mat = problem.hamiltonian.to_matrix(problem.n_qubits)
    e_min = float(np.linalg.eigvalsh(mat)[0])
    rng = np.random.default_rng(4)
    for _ in range(5):
        theta = rng.normal(scale=0.4, size=problem.n_parameters)
        assert problem.energy(theta) >= e_min - 1e-10


def test_adjoint_gradient_matches_fd():
    problem = small_problem(seed=17, adapted=True)
    rng = np.random.default_rng(6)
    theta = rng.normal(scale=0.15, size=problem.n_parameters)
    e_adj, g_adj = problem.energy_and_gradient(theta, mode="adjoint")
    e_fd, g_fd = problem.energy_and_gradient(theta, mode="fd", fd_step=1e-5)
    assert e_adj == pytest.approx(e_fd, abs=1e-12)
    assert np.allclose(g_adj, g_fd, atol=1e-8)


def test_fd_gradient_step_halving_consistency():
    problem = small_problem(seed=21, adapted=True)
    rng = np.random.default_rng(9)
    theta = rng.normal(scale=0.15, size=problem.n_parameters)
    _, g_h = problem.energy_and_gradient(theta, mode="fd", fd_step=2e-5)
    _, g_half = problem.energy_and_gradient(theta, mode="fd", fd_step=1e-5)
    assert np.max(np.abs(g_h - g_half)) < 1e-5


def test_module_level_fd_wrapper():
    problem = small_problem(seed=3)
    theta = np.full(problem.n_parameters, 0.05)
    e1, g1 = energy_and_gradient(problem, theta, step=1e-6)
    e2, g2 = problem.energy_and_gradient(theta, mode="fd", fd_step=1e-6)
    assert e1 == e2
    assert np.array_equal(g1, g2)


def test_gradient_mode_validation():
    problem = small_problem(seed=3)
    with pytest.raises(ValueError):
        problem.energy_and_gradient(np.zeros(problem.n_parameters), mode="bogus")


def test_problem_capacity_cap():
    m = CAPACITY // 2 + 1
    ints = random_integrals(m, 2, seed=0)
    excitations = enumerate_excitations(ints.n_occ, ints.n_virt)
    from uccprune.fermion import ParameterMap

    with pytest.raises(CapacityError):
        UccsdProblem(ints, excitations, ParameterMap.identity(len(excitations)))
