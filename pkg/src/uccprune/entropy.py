"""Single-orbital entropies and the entropy-guided freezing policy.

A wavefunction here is a map from determinants (alpha_mask, beta_mask)
to real coefficients, using the same descending-creation sign convention
as the fci module. For a state with definite N_alpha and N_beta the 4x4
one-orbital reduced density matrix over {empty, up, down, updown} is
diagonal: any off-diagonal element would connect determinant pairs with
different particle numbers in the traced-out remainder. The probs vector
therefore IS the eigenvalue list; the dense partial-trace oracle in the
tests verifies this once on every small system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .fcidump import IntegralSet
from .fci import apply_excitation, fci_ground_state
from .refstate import mp2

MAX_ENTROPY = math.log(4.0)


@dataclass(slots=True)
class OrbitalRdm:
    """Diagonal of one spatial orbital's occupation-basis density matrix."""

    orbital: int
    probs: np.ndarray  # ordered {empty, up, down, updown}


@dataclass(slots=True)
class EntropyProfile:
    """Von Neumann entropy per spatial orbital, in nats."""

    entropies: np.ndarray
    source: str  # "mp2" or "fci"
    n_occ: int


def mp2_wavefunction(integrals: IntegralSet) -> dict:
    """HF plus MP2 doubles as a determinant map, L2-normalized.

    Mixed-spin determinants carry t[ijab]; same-spin ones carry
    t[ijab] - t[ijba]. Signs come from applying the excitation operators
    a+_R a+_S a_Q a_P to the reference bitstring.
    """
    m = integrals.n_spatial
    o, v = integrals.n_occ, integrals.n_virt
    t = mp2(integrals).mp2_amplitudes
    hf = (1 << o) - 1
    full_hf = hf | hf << m

    wf = {(hf, hf): 1.0}
    lo = (1 << m) - 1

    def add(amp, annihilate, create):
        if abs(amp) < 1e-14:
            return
        step = apply_excitation(full_hf, annihilate, create)
        if step is None:
            return
        sign, new = step
        key = (new & lo, new >> m)
        wf[key] = wf.get(key, 0.0) + sign * amp

    for i in range(o):
        for j in range(o):
            for a in range(v):
                for b in range(v):
                    # i_alpha j_beta -> a_alpha b_beta
                    add(t[i, j, a, b], (i, m + j), (o + a, m + o + b))
    for spin in (0, m):
        for i in range(o):
            for j in range(i + 1, o):
                for a in range(v):
                    for b in range(a + 1, v):
                        amp = t[i, j, a, b] - t[i, j, b, a]
                        add(amp, (spin + i, spin + j), (spin + o + a, spin + o + b))

    norm = math.sqrt(sum(c * c for c in wf.values()))
    return {det: c / norm for det, c in wf.items()}


def single_orbital_rdm(wavefunction: dict, p: int) -> OrbitalRdm:
    """Occupation probabilities of spatial orbital p.

    The input must have definite (N_alpha, N_beta); it is renormalized if
    the coefficients do not sum to one in squares.
    """
    counts = {(bin(a).count("1"), bin(b).count("1")) for a, b in wavefunction}
    if len(counts) > 1:
        raise ContractViolation(f"mixed particle-number sectors in wavefunction: {sorted(counts)}")
    probs = np.zeros(4)
    for (amask, bmask), c in wavefunction.items():
        state = (amask >> p & 1) | (bmask >> p & 1) << 1
        probs[state] += c * c
    total = probs.sum()
    if total <= 0:
        raise ContractViolation("wavefunction has zero norm")
    return OrbitalRdm(p, probs / total)


def orbital_entropy(rdm: OrbitalRdm) -> float:
    """-sum lambda ln lambda in nats, with 0 ln 0 = 0."""
    lam = rdm.probs[rdm.probs > 0.0]
    return float(-np.sum(lam * np.log(lam))) + 0.0


def entropy_profile(integrals: IntegralSet, source: str = "mp2") -> EntropyProfile:
    """Entropy of every spatial orbital from the MP2 or FCI wavefunction."""
    if source == "mp2":
        wf = mp2_wavefunction(integrals)
    elif source == "fci":
        _, wf = fci_ground_state(integrals)
    else:
        raise ValueError(f"unknown entropy source {source!r}")
    ent = np.array(
        [orbital_entropy(single_orbital_rdm(wf, p)) for p in range(integrals.n_spatial)]
    )
    return EntropyProfile(ent, source, integrals.n_occ)


def select_frozen(profile: EntropyProfile, k: int | None = None, eta: float | None = None):
    """Occupied orbitals to freeze, lowest entropy first.

    Exactly one policy applies: the k lowest-entropy occupied orbitals,
    or all occupied orbitals with S_p < eta * max_q S_q.
    """
    if (k is None) == (eta is None):
        raise ValueError("pass exactly one of k or eta")
    order = sorted(range(profile.n_occ), key=lambda p: (profile.entropies[p], p))
    if k is not None:
        if k < 0 or k >= profile.n_occ:
            raise ValueError(f"cannot freeze {k} of {profile.n_occ} occupied orbitals")
        return order[:k]
    cutoff = eta * float(np.max(profile.entropies))
    return [p for p in order if profile.entropies[p] < cutoff]


def profile_csv_rows(profile: EntropyProfile, bond_length: float) -> list[str]:
    """CSV rows `bond_length, orbital_index, entropy, source`."""
    return [
        f"{bond_length:.6f},{p},{profile.entropies[p]:.12e},{profile.source}"
        for p in range(len(profile.entropies))
    ]
