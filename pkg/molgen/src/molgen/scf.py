"""Restricted Hartree-Fock with DIIS acceleration.

Closed-shell RHF over a contracted Gaussian basis.  The SCF result carries
everything needed to dump MO-basis integrals: canonical MO coefficients,
orbital energies, and the total energy split into electronic and nuclear
repulsion parts.
"""

from dataclasses import dataclass, field

import numpy as np

from .basis import CHARGES, build_basis
from .integrals import eri_tensor, kinetic_matrix, nuclear_matrix, overlap_matrix


class ScfError(RuntimeError):
    """SCF failed to converge or the system is inconsistent."""


@dataclass
class ScfResult:
    e_total: float
    e_nuc: float
    mo_coeff: np.ndarray
    mo_energies: np.ndarray
    n_basis: int
    n_electrons: int
    hcore: np.ndarray = field(repr=False, default=None)
    eri: np.ndarray = field(repr=False, default=None)

    @property
    def n_occ(self) -> int:
        return self.n_electrons // 2


def nuclear_repulsion(atoms) -> float:
    e = 0.0
    for i, (sym_i, xyz_i) in enumerate(atoms):
        for sym_j, xyz_j in atoms[:i]:
            r = np.linalg.norm(np.asarray(xyz_i) - np.asarray(xyz_j))
            e += CHARGES[sym_i] * CHARGES[sym_j] / r
    return e


def _build_fock(hcore, eri, density):
    return hcore + _two_electron_part(eri, density)


def _density(c, n_occ):
    c_occ = c[:, :n_occ]
    return c_occ @ c_occ.T


def _diis_extrapolate(focks, errors):
    m = len(focks)
    b = -np.ones((m + 1, m + 1))
    b[m, m] = 0.0
    for i in range(m):
        for j in range(m):
            b[i, j] = np.vdot(errors[i], errors[j])
    rhs = np.zeros(m + 1)
    rhs[m] = -1.0
    try:
        coef = np.linalg.solve(b, rhs)
    except np.linalg.LinAlgError:
        return focks[-1]
    f = np.zeros_like(focks[-1])
    for ci, fi in zip(coef[:m], focks):
        f += ci * fi
    return f


def _two_electron_part(eri, d):
    j = np.einsum("ijkl,kl->ij", eri, d)
    k = np.einsum("ikjl,kl->ij", eri, d)
    return 2.0 * j - k


def _oda_warmup(hcore, eri, s, solve_fock, n_occ, err_target, max_iterations):
    """Optimal damping: monotone energy descent along density segments.

    The RHF energy is quadratic in the density, so the exact minimizer on
    the segment D + lam*(D_aufbau - D) is available in closed form.  This
    walks reliably through the near-degenerate oscillation region that
    defeats plain DIIS on stretched geometries; DIIS then takes over for
    the quadratic tail.
    """
    eps, c = solve_fock(hcore)
    d = _density(c, n_occ)
    for _ in range(max_iterations):
        f = _build_fock(hcore, eri, d)
        err = float(np.linalg.norm(f @ d @ s - s @ d @ f))
        if err < err_target:
            break
        eps, c = solve_fock(f)
        delta = _density(c, n_occ) - d
        b = 2.0 * float(np.sum(f * delta))
        a = float(np.sum(delta * _two_electron_part(eri, delta)))
        lam = 1.0 if (a <= 0.0 or -b / (2.0 * a) >= 1.0) else -b / (2.0 * a)
        d = d + lam * delta
    return d


def run_rhf(atoms, n_electrons=None, max_iterations=200, e_tol=1e-12,
            d_tol=1e-10, diis_size=8) -> ScfResult:
    """Solve closed-shell RHF for a list of (symbol, xyz_bohr) atoms."""
    if n_electrons is None:
        n_electrons = sum(CHARGES[sym] for sym, _ in atoms)
    if n_electrons % 2 != 0:
        raise ScfError(f"RHF needs an even electron count, got {n_electrons}")

    basis = build_basis(atoms)
    n = len(basis)
    n_occ = n_electrons // 2
    if n_occ > n:
        raise ScfError(
            f"{n_electrons} electrons need {n_occ} doubly occupied orbitals "
            f"but the basis has only {n} functions"
        )

    s = overlap_matrix(basis)
    hcore = kinetic_matrix(basis) + nuclear_matrix(basis, atoms, CHARGES)
    eri = eri_tensor(basis)
    e_nuc = nuclear_repulsion(atoms)

    s_vals, s_vecs = np.linalg.eigh(s)
    if s_vals.min() < 1e-10:
        raise ScfError(f"near-singular overlap, smallest eigenvalue {s_vals.min():.3e}")
    x = s_vecs @ np.diag(s_vals**-0.5) @ s_vecs.T

    def solve_fock(f):
        fp = x.T @ f @ x
        eps, cp = np.linalg.eigh(fp)
        return eps, x @ cp

    for oda_target in (1e-5, 1e-8):
        d = _oda_warmup(hcore, eri, s, solve_fock, n_occ, oda_target, 500)

        e_old = 0.0
        focks, errors = [], []
        for it in range(1, max_iterations + 1):
            f = _build_fock(hcore, eri, d)
            e_elec = float(np.sum(d * (hcore + f)))

            err = f @ d @ s - s @ d @ f
            focks.append(f)
            errors.append(err)
            if len(focks) > diis_size:
                focks.pop(0)
                errors.pop(0)
            if it >= 2:
                f = _diis_extrapolate(focks, errors)

            eps, c = solve_fock(f)
            d_new = _density(c, n_occ)

            delta_e = abs(e_elec - e_old)
            delta_d = float(np.linalg.norm(d_new - d))
            d, e_old = d_new, e_elec
            if delta_e < e_tol and delta_d < d_tol:
                return ScfResult(
                    e_total=e_elec + e_nuc,
                    e_nuc=e_nuc,
                    mo_coeff=c,
                    mo_energies=eps,
                    n_basis=n,
                    n_electrons=n_electrons,
                    hcore=hcore,
                    eri=eri,
                )

    geom = "; ".join(f"{sym} {xyz[0]:.4f} {xyz[1]:.4f} {xyz[2]:.4f}"
                     for sym, xyz in atoms)
    raise ScfError(
        f"SCF did not converge in {max_iterations} iterations for [{geom}]"
    )


def mo_integrals(result: ScfResult):
    """Transform AO integrals to the canonical MO basis.

    Returns (h1, h2) with h2 in chemists' notation (ij|kl).
    """
    c = result.mo_coeff
    h1 = c.T @ result.hcore @ c
    h2 = np.einsum("pi,pqrs->iqrs", c, result.eri, optimize=True)
    h2 = np.einsum("qj,iqrs->ijrs", c, h2, optimize=True)
    h2 = np.einsum("rk,ijrs->ijks", c, h2, optimize=True)
    h2 = np.einsum("sl,ijks->ijkl", c, h2, optimize=True)
    return h1, h2
