"""Exact diagonalization in the fixed (N_alpha, N_beta) determinant sector.

Determinants are (alpha_mask, beta_mask) bit pairs over spatial orbitals.
The sign convention matches the statevector engine: a determinant is the
string of creation operators applied in descending spin-orbital index
order, which makes it exactly the Jordan-Wigner basis state
alpha_mask | beta_mask << M with a plus sign. All phases below are
computed with the same parity arithmetic the JW mapping uses, so CI
vectors can be compared against simulator states without sign fixups.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, ConvergenceError
from .fcidump import IntegralSet
from .simulator import Statevector

_SECTOR_CAP = 10**6


@dataclass(slots=True)
class DeterminantBasis:
    """All determinants of one (N_alpha, N_beta) sector."""

    n_spatial: int
    n_alpha: int
    n_beta: int
    alpha_strings: np.ndarray
    beta_strings: np.ndarray

    @classmethod
    def build(cls, n_spatial, n_alpha, n_beta) -> "DeterminantBasis":
        def strings(n):
            out = [sum(1 << p for p in c) for c in combinations(range(n_spatial), n)]
            return np.array(sorted(out), dtype=np.int64)

        return cls(n_spatial, n_alpha, n_beta, strings(n_alpha), strings(n_beta))

    def __len__(self):
        return len(self.alpha_strings) * len(self.beta_strings)

    def index(self, ia: int, ib: int) -> int:
        return ia * len(self.beta_strings) + ib


def _annihilate(b: int, p: int):
    """(sign, new) for a_p on occupation integer b, or None if empty."""
    bit = 1 << p
    if not b & bit:
        return None
    sign = -1.0 if (b & (bit - 1)).bit_count() & 1 else 1.0
    return sign, b ^ bit


def _create(b: int, p: int):
    bit = 1 << p
    if b & bit:
        return None
    sign = -1.0 if (b & (bit - 1)).bit_count() & 1 else 1.0
    return sign, b | bit


def apply_excitation(b: int, annihilate, create):
    """Apply a+_R ... a_P ... (annihilations rightmost-first) to string b.

    apply_excitation(b, (P, Q), (R, S)) realizes a+_R a+_S a_Q a_P: the
    rightmost operator acts first, so annihilations run in the given
    order (P then Q) and creations in reverse (S then R). Returns
    (sign, new_b) or None if the result vanishes.
    """
    sign = 1.0
    for p in tuple(annihilate):
        step = _annihilate(b, p)
        if step is None:
            return None
        sign *= step[0]
        b = step[1]
    for p in reversed(tuple(create)):
        step = _create(b, p)
        if step is None:
            return None
        sign *= step[0]
        b = step[1]
    return sign, b


def _spin_orbital_tensors(integrals: IntegralSet):
    """h[P,Q] and antisymmetrized <PQ||RS> over 2M spin orbitals."""
    m = integrals.n_spatial
    n = 2 * m
    h = np.zeros((n, n))
    h[:m, :m] = integrals.h1
    h[m:, m:] = integrals.h1
    # physicists' <pq|rs> = (pr|qs)
    phys = integrals.h2.transpose(0, 2, 1, 3)
    g = np.zeros((n, n, n, n))
    for s1 in (0, m):
        for s2 in (0, m):
            g[s1 : s1 + m, s2 : s2 + m, s1 : s1 + m, s2 : s2 + m] += phys
    g = g - g.transpose(0, 1, 3, 2)
    return h, g


def _build_sector_matrix(integrals: IntegralSet, basis: DeterminantBasis) -> sp.csr_matrix:
    m = basis.n_spatial
    h, g = _spin_orbital_tensors(integrals)
    alpha_index = {int(s): k for k, s in enumerate(basis.alpha_strings)}
    beta_index = {int(s): k for k, s in enumerate(basis.beta_strings)}
    n_beta_strings = len(basis.beta_strings)

    rows, cols, vals = [], [], []
    for ia, sa in enumerate(basis.alpha_strings):
        for ib, sb in enumerate(basis.beta_strings):
            full = int(sa) | int(sb) << m
            col = ia * n_beta_strings + ib
            occ = [p for p in range(2 * m) if full >> p & 1]
            virt = [p for p in range(2 * m) if not full >> p & 1]

            diag = integrals.core_energy + sum(h[p, p] for p in occ)
            for ii, p in enumerate(occ):
                for q in occ[ii + 1 :]:
                    diag += g[p, q, p, q]
            rows.append(col)
            cols.append(col)
            vals.append(diag)

            for p in occ:
                for q in virt:
                    if (p < m) != (q < m):
                        continue  # spin flip leaves the sector
                    step = apply_excitation(full, (p,), (q,))
                    if step is None:
                        continue
                    sign, new = step
                    val = h[q, p]
                    for r in occ:
                        if r != p:
                            val += g[q, r, p, r]
                    if abs(val) < 1e-14:
                        continue
                    ja = alpha_index[new & ((1 << m) - 1)]
                    jb = beta_index[new >> m]
                    rows.append(ja * n_beta_strings + jb)
                    cols.append(col)
                    vals.append(sign * val)

            for pi, p in enumerate(occ):
                for q in occ[pi + 1 :]:
                    for ri, r in enumerate(virt):
                        for s in virt[ri + 1 :]:
                            na = (p < m) + (q < m)
                            nb = (r < m) + (s < m)
                            if na != nb:
                                continue
                            val = g[r, s, p, q]
                            if abs(val) < 1e-14:
                                continue
                            step = apply_excitation(full, (p, q), (r, s))
                            if step is None:
                                continue
                            sign, new = step
                            ja = alpha_index[new & ((1 << m) - 1)]
                            jb = beta_index[new >> m]
                            rows.append(ja * n_beta_strings + jb)
                            cols.append(col)
                            vals.append(sign * val)

    dim = len(basis)
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


def _davidson(matrix: sp.csr_matrix, guess: np.ndarray, tol=1e-10, max_iter=200):
    """Lowest eigenpair of a symmetric sparse matrix, diagonal-preconditioned."""
    dim = matrix.shape[0]
    diag = matrix.diagonal()
    v = guess / np.linalg.norm(guess)
    basis = [v]
    last = np.inf
    for _ in range(max_iter):
        vmat = np.column_stack(basis)
        avmat = matrix @ vmat
        small = vmat.T @ avmat
        small = 0.5 * (small + small.T)
        w, s = np.linalg.eigh(small)
        lam = w[0]
        x = vmat @ s[:, 0]
        ax = avmat @ s[:, 0]
        resid = ax - lam * x
        rnorm = np.linalg.norm(resid)
        if rnorm < 1e-7 and abs(lam - last) < tol:
            return lam, x
        last = lam
        denom = diag - lam
        denom = np.where(np.abs(denom) < 1e-8, np.copysign(1e-8, denom + 1e-30), denom)
        t = resid / denom
        for u in basis:
            t -= np.dot(u, t) * u
        tn = np.linalg.norm(t)
        if tn < 1e-12:
            t = np.random.default_rng(len(basis)).normal(size=dim)
            for u in basis:
                t -= np.dot(u, t) * u
            tn = np.linalg.norm(t)
        basis.append(t / tn)
        if len(basis) > 40:
            keep = vmat @ s[:, : min(4, s.shape[1])]
            basis = [keep[:, 0] / np.linalg.norm(keep[:, 0])]
            for col in range(1, keep.shape[1]):
                u = keep[:, col]
                for prev in basis:
                    u -= np.dot(prev, u) * prev
                un = np.linalg.norm(u)
                if un > 1e-12:
                    basis.append(u / un)
    raise ConvergenceError("Davidson did not converge within the iteration cap")


def fci_ground_state(integrals: IntegralSet):
    """(energy, ci) for the lowest state of the electron-number sector.

    ci maps (alpha_mask, beta_mask) to a real coefficient; the vector is
    normalized with a positive coefficient on the HF determinant.
    """
    n_alpha = (integrals.n_electrons + integrals.ms2) // 2
    n_beta = integrals.n_electrons - n_alpha
    basis = DeterminantBasis.build(integrals.n_spatial, n_alpha, n_beta)
    dim = len(basis)
    if dim > _SECTOR_CAP:
        raise CapacityError(f"determinant sector of size {dim} exceeds {_SECTOR_CAP}")

    matrix = _build_sector_matrix(integrals, basis)
    hf_alpha = (1 << n_alpha) - 1
    hf_beta = (1 << n_beta) - 1
    ia = int(np.searchsorted(basis.alpha_strings, hf_alpha))
    ib = int(np.searchsorted(basis.beta_strings, hf_beta))
    hf_pos = basis.index(ia, ib)

    if dim <= 64:
        w, vecs = np.linalg.eigh(matrix.toarray())
        energy, vec = float(w[0]), vecs[:, 0]
    else:
        guess = np.zeros(dim)
        guess[hf_pos] = 1.0
        energy, vec = _davidson(matrix, guess)
        energy = float(energy)

    vec = vec / np.linalg.norm(vec)
    anchor = vec[hf_pos] if abs(vec[hf_pos]) > 1e-12 else vec[int(np.argmax(np.abs(vec)))]
    if anchor < 0:
        vec = -vec

    ci = {}
    n_beta_strings = len(basis.beta_strings)
    for pos, c in enumerate(vec):
        if abs(c) > 1e-14:
            ia, ib = divmod(pos, n_beta_strings)
            ci[(int(basis.alpha_strings[ia]), int(basis.beta_strings[ib]))] = float(c)
    return energy, ci


def ci_to_statevector(ci: dict, n_spatial: int) -> Statevector:
    """Place CI coefficients at their Jordan-Wigner bitstring positions."""
    amps = np.zeros(1 << (2 * n_spatial), dtype=np.complex128)
    for (amask, bmask), c in ci.items():
        amps[amask | bmask << n_spatial] = c
    norm = np.linalg.norm(amps)
    if norm > 0:
        amps /= norm
    return Statevector(2 * n_spatial, amps)
