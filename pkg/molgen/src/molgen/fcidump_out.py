"""FCIDUMP export for RHF MO integrals.

Standard FCIDUMP layout: a &FCI namelist header, then two-electron
integrals (ij|kl) in chemists' notation over canonically unique index
quadruples, one-electron integrals h[i][j] with k=l=0, and finally the
core (nuclear repulsion) energy with all indices zero.  Orbital indices
are 1-based.  All orbitals are tagged symmetry 1 (no point-group use).
"""

import numpy as np

_LINE = " {: .16E} {:4d} {:4d} {:4d} {:4d}\n"


def write_fcidump(path, h1, h2, core_energy, n_electrons, ms2=0,
                  threshold=1e-14):
    """Write integrals to path.

    h1 is the (n, n) one-body matrix, h2 the (n, n, n, n) two-body tensor
    in chemists' notation (ij|kl).  Entries with |value| <= threshold are
    skipped, except the core energy which is always written.
    """
    n = h1.shape[0]
    if h1.shape != (n, n) or h2.shape != (n, n, n, n):
        raise ValueError("inconsistent integral shapes")

    with open(path, "w") as fh:
        orbsym = ",".join(["1"] * n)
        fh.write(f"&FCI NORB={n},NELEC={n_electrons},MS2={ms2},\n")
        fh.write(f"  ORBSYM={orbsym},\n")
        fh.write("  ISYM=1,\n")
        fh.write("&END\n")
        for i in range(n):
            for j in range(i + 1):
                ij = i * (i + 1) // 2 + j
                for k in range(i + 1):
                    for l in range(k + 1):
                        kl = k * (k + 1) // 2 + l
                        if kl > ij:
                            continue
                        val = h2[i, j, k, l]
                        if abs(val) > threshold:
                            fh.write(_LINE.format(val, i + 1, j + 1, k + 1, l + 1))
        for i in range(n):
            for j in range(i + 1):
                val = h1[i, j]
                if abs(val) > threshold:
                    fh.write(_LINE.format(val, i + 1, j + 1, 0, 0))
        fh.write(_LINE.format(float(core_energy), 0, 0, 0, 0))


def hf_energy_from_mo(h1, h2, core_energy, n_electrons) -> float:
    """RHF energy from MO-basis integrals; cross-check for the SCF result."""
    n_occ = n_electrons // 2
    e = float(core_energy)
    e += 2.0 * float(np.trace(h1[:n_occ, :n_occ]))
    for i in range(n_occ):
        for j in range(n_occ):
            e += 2.0 * h2[i, i, j, j] - h2[i, j, j, i]
    return e
