"""Hartree-Fock reference quantities and the MP2 first-order correction.

All formulas assume a closed-shell reference built from canonical RHF
orbitals, so the Fock matrix is diagonal and its diagonal is recovered
directly from the integrals. No SCF is run here; the FCIDUMP producer is
responsible for canonicalization.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fcidump import IntegralSet

# denominators smaller than this are treated as degenerate
_DEGENERACY_TOL = 1e-8


@dataclass(slots=True)
class ReferenceState:
    """HF energy, orbital energies, and MP2 doubles amplitudes."""

    n_occ: int
    e_hf: float
    orbital_energies: np.ndarray
    mp2_amplitudes: np.ndarray  # t[i, j, a, b] over occ x occ x virt x virt
    e_mp2: float  # correlation part only

    @property
    def e_mp2_total(self) -> float:
        return self.e_hf + self.e_mp2


def hf_energy(integrals: IntegralSet) -> float:
    """Closed-shell HF energy from the integrals.

    E = core + 2 sum_i h1[ii] + sum_ij (2(ii|jj) - (ij|ji)) over occupied.
    """
    o = integrals.n_occ
    h1 = integrals.h1[:o, :o]
    h2 = integrals.h2[:o, :o, :o, :o]
    e = integrals.core_energy + 2.0 * np.trace(h1)
    e += 2.0 * np.einsum("iijj->", h2) - np.einsum("ijji->", h2)
    return float(e)


def orbital_energies(integrals: IntegralSet) -> np.ndarray:
    """Fock diagonal: eps_p = h1[pp] + sum_i (2(pp|ii) - (pi|ip))."""
    o = integrals.n_occ
    h2 = integrals.h2
    eps = np.diagonal(integrals.h1).copy()
    eps += 2.0 * np.einsum("ppii->p", h2[:, :, :o, :o]) - np.einsum(
        "piip->p", h2[:, :o, :o, :]
    )
    return eps


def mp2(integrals: IntegralSet) -> ReferenceState:
    """MP2 amplitudes and energy on top of the RHF reference.

    t[ijab] = (ia|jb) / (eps_i + eps_j - eps_a - eps_b). Degenerate
    denominators (|den| <= 1e-8) are clamped to zero amplitude with a
    warning; this keeps stretched-geometry scans usable for entropy
    ordering even where MP2 itself degrades.
    """
    o, v = integrals.n_occ, integrals.n_virt
    eps = orbital_energies(integrals)
    if np.any(np.diff(eps) < -1e-12):
        warnings.warn("orbital energies are not ascending; check FCIDUMP ordering", stacklevel=2)
    # (ia|jb) with i,j occupied and a,b virtual
    ovov = integrals.h2[:o, o:, :o, o:]
    iajb = ovov.transpose(0, 2, 1, 3)  # -> [i, j, a, b]
    den = (
        eps[:o, None, None, None]
        + eps[None, :o, None, None]
        - eps[None, None, o:, None]
        - eps[None, None, None, o:]
    )
    degenerate = np.abs(den) <= _DEGENERACY_TOL
    if np.any(degenerate):
        warnings.warn(
            f"{int(np.count_nonzero(degenerate))} MP2 denominator(s) below "
            f"{_DEGENERACY_TOL}; clamping those amplitudes to zero",
            stacklevel=2,
        )
    t = np.where(degenerate, 0.0, iajb / np.where(degenerate, 1.0, den))
    if np.any(np.abs(t) > 1.0):
        warnings.warn("MP2 amplitude exceeds 1; near-degenerate reference", stacklevel=2)
    e_corr = float(np.einsum("ijab,ijab->", t, 2.0 * iajb - iajb.transpose(0, 1, 3, 2)))
    return ReferenceState(o, hf_energy(integrals), eps, t, e_corr)
