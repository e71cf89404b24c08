"""FCIDUMP ingestion, emission, and frozen-orbital reduction.

Conventions used throughout the package: integrals are over spatial
orbitals in chemists' notation, (pq|rs) = h2[p, q, r, s], all values in
Hartree. Orbitals are canonical RHF orbitals ordered by ascending orbital
energy, so the reference determinant doubly occupies the lowest
n_electrons/2 spatial orbitals. File indices are 1-based, in-memory
indices 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FcidumpError

# duplicate entries may disagree by at most this much
_DUP_TOL = 1e-10
# integrals below this are not written out
_WRITE_TOL = 1e-12


@dataclass(slots=True)
class IntegralSet:
    """Molecular integral data behind a second-quantized Hamiltonian.

    h1 is symmetric, h2 carries the 8-fold permutational symmetry of real
    orbitals. core_energy holds the nuclear repulsion plus any folded
    frozen-orbital contribution. Instances are treated as immutable; the
    arrays are marked read-only on construction.
    """

    n_spatial: int
    n_electrons: int
    ms2: int
    core_energy: float
    h1: np.ndarray
    h2: np.ndarray

    def __post_init__(self):
        m = self.n_spatial
        self.h1 = np.asarray(self.h1, dtype=np.float64)
        self.h2 = np.asarray(self.h2, dtype=np.float64)
        if self.h1.shape != (m, m):
            raise ValueError(f"h1 shape {self.h1.shape}, expected {(m, m)}")
        if self.h2.shape != (m, m, m, m):
            raise ValueError(f"h2 shape {self.h2.shape}, expected rank-4 over {m} orbitals")
        if self.n_electrons % 2:
            raise ValueError("only closed-shell (even electron) systems are supported")
        if not (0 <= self.n_electrons <= 2 * m):
            raise ValueError(f"n_electrons={self.n_electrons} out of range for {m} orbitals")
        self.h1.flags.writeable = False
        self.h2.flags.writeable = False

    @property
    def n_occ(self) -> int:
        return self.n_electrons // 2

    @property
    def n_virt(self) -> int:
        return self.n_spatial - self.n_occ

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_spatial

    def validate(self, tol=1e-12):
        """Check the tensor symmetries; raises FcidumpError on violation."""
        if np.max(np.abs(self.h1 - self.h1.T)) > tol:
            raise FcidumpError("h1 is not symmetric")
        h2 = self.h2
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if np.max(np.abs(h2 - h2.transpose(perm))) > tol:
                raise FcidumpError(f"h2 violates permutational symmetry {perm}")

    def allclose(self, other: "IntegralSet", tol=1e-12) -> bool:
        return (
            self.n_spatial == other.n_spatial
            and self.n_electrons == other.n_electrons
            and self.ms2 == other.ms2
            and abs(self.core_energy - other.core_energy) <= tol
            and np.allclose(self.h1, other.h1, atol=tol, rtol=0.0)
            and np.allclose(self.h2, other.h2, atol=tol, rtol=0.0)
        )


def _canonical(p, q, r, s):
    """Representative of the 8-fold symmetry class of (pq|rs)."""
    if p < q:
        p, q = q, p
    if r < s:
        r, s = s, r
    if (p, q) < (r, s):
        p, q, r, s = r, s, p, q
    return p, q, r, s


def _parse_header(lines):
    """Consume header lines up to &END or /; return (keys, n_consumed)."""
    header = []
    end = None
    for ln, raw in enumerate(lines):
        text = raw.strip()
        header.append(text)
        if text.endswith("&END") or text.endswith("/") or text == "&END":
            end = ln
            break
    if end is None:
        raise FcidumpError("line 1: header not terminated by &END or /")
    blob = " ".join(header)
    if not blob.upper().startswith("&FCI"):
        raise FcidumpError("line 1: expected header to start with &FCI")
    blob = blob[4:]
    for tail in ("&END", "/"):
        if blob.rstrip().upper().endswith(tail):
            blob = blob.rstrip()[: -len(tail)]
            break
    keys = {}
    for item in blob.replace("\n", " ").split(","):
        if "=" not in item:
            continue
        key, _, value = item.partition("=")
        keys[key.strip().upper()] = value.strip()
    return keys, end + 1


def parse_fcidump(text: str) -> IntegralSet:
    """Parse FCIDUMP text into an IntegralSet.

    Unlisted integrals are zero. Each listed value is expanded to its full
    8-fold symmetry class. Orbital-energy records (i 0 0 0) are accepted
    and ignored. Duplicate entries must agree within 1e-10.
    """
    lines = text.splitlines()
    keys, start = _parse_header(lines)
    try:
        n_spatial = int(keys["NORB"])
        n_electrons = int(keys["NELEC"])
    except KeyError as exc:
        raise FcidumpError(f"line 1: header missing {exc.args[0]}") from None
    except ValueError:
        raise FcidumpError("line 1: NORB/NELEC not integers") from None
    try:
        ms2 = int(keys.get("MS2", "0"))
    except ValueError:
        raise FcidumpError("line 1: MS2 not an integer") from None
    if n_spatial <= 0:
        raise FcidumpError("line 1: NORB must be positive")

    h1 = np.zeros((n_spatial, n_spatial))
    h2 = np.zeros((n_spatial,) * 4)
    core = 0.0
    seen: dict[tuple, float] = {}

    def record(key, value, ln):
        prev = seen.get(key)
        if prev is not None and abs(prev - value) > _DUP_TOL:
            raise FcidumpError(f"line {ln}: duplicate entry for {key} differs ({prev} vs {value})")
        seen[key] = value

    for offset, raw in enumerate(lines[start:]):
        ln = start + offset + 1
        tokens = raw.split()
        if not tokens:
            continue
        if len(tokens) != 5:
            raise FcidumpError(f"line {ln}: expected `value i j k l`, got {len(tokens)} fields")
        try:
            value = float(tokens[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(t) for t in tokens[1:])
        except ValueError:
            raise FcidumpError(f"line {ln}: unparsable record") from None
        for idx in (i, j, k, l):
            if not (0 <= idx <= n_spatial):
                raise FcidumpError(f"line {ln}: index {idx} out of range [0, {n_spatial}]")
        if i == j == k == l == 0:
            record(("core",), value, ln)
            core = value
        elif i > 0 and j > 0 and k > 0 and l > 0:
            key = ("h2",) + _canonical(i - 1, j - 1, k - 1, l - 1)
            record(key, value, ln)
            p, q, r, s = key[1:]
            for a, b, c, d in (
                (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
            ):
                h2[a, b, c, d] = value
        elif i > 0 and j > 0 and k == 0 and l == 0:
            key = ("h1", max(i, j) - 1, min(i, j) - 1)
            record(key, value, ln)
            h1[i - 1, j - 1] = value
            h1[j - 1, i - 1] = value
        elif i > 0 and j == k == l == 0:
            continue  # orbital-energy record, not part of the tensors
        else:
            raise FcidumpError(f"line {ln}: unsupported index pattern ({i} {j} {k} {l})")

    out = IntegralSet(n_spatial, n_electrons, ms2, core, h1, h2)
    out.validate()
    return out


def write_fcidump(integrals: IntegralSet) -> str:
    """Emit canonical FCIDUMP text, one line per 8-fold symmetry class."""
    m = integrals.n_spatial
    lines = [
        f"&FCI NORB={m},NELEC={integrals.n_electrons},MS2={integrals.ms2},",
        " ORBSYM=" + "1," * m,
        " ISYM=1,",
        "&END",
    ]

    def fmt(value, i, j, k, l):
        return f"{value: .16E} {i:4d} {j:4d} {k:4d} {l:4d}"

    h2 = integrals.h2
    for p in range(m):
        for q in range(p + 1):
            for r in range(p + 1):
                s_top = q if r == p else r
                for s in range(s_top + 1):
                    value = h2[p, q, r, s]
                    if abs(value) >= _WRITE_TOL:
                        lines.append(fmt(value, p + 1, q + 1, r + 1, s + 1))
    h1 = integrals.h1
    for p in range(m):
        for q in range(p + 1):
            if abs(h1[p, q]) >= _WRITE_TOL:
                lines.append(fmt(h1[p, q], p + 1, q + 1, 0, 0))
    lines.append(fmt(integrals.core_energy, 0, 0, 0, 0))
    return "\n".join(lines) + "\n"


def load_fcidump(path) -> IntegralSet:
    with open(path, "r", encoding="ascii") as handle:
        return parse_fcidump(handle.read())


def save_fcidump(integrals: IntegralSet, path):
    with open(path, "w", encoding="ascii") as handle:
        handle.write(write_fcidump(integrals))


def freeze_orbitals(integrals: IntegralSet, frozen) -> IntegralSet:
    """Fold doubly occupied orbitals into the core and drop them.

    Only occupied orbitals of the reference may be frozen. The reduced
    problem has the same HF energy as the full one (exact identity), which
    the tests assert to 1e-10.
    """
    frozen = sorted(set(int(f) for f in frozen))
    if not frozen:
        return IntegralSet(
            integrals.n_spatial,
            integrals.n_electrons,
            integrals.ms2,
            integrals.core_energy,
            integrals.h1.copy(),
            integrals.h2.copy(),
        )
    n_occ = integrals.n_occ
    for f in frozen:
        if not (0 <= f < n_occ):
            raise ValueError(f"orbital {f} is not occupied (n_occ={n_occ}); cannot freeze")

    h1, h2 = integrals.h1, integrals.h2
    fz = np.array(frozen)
    core = integrals.core_energy + 2.0 * np.sum(h1[fz, fz])
    # 2(ii|jj) - (ij|ji) over frozen pairs
    coul = h2[np.ix_(fz, fz, fz, fz)]
    core += 2.0 * np.einsum("iijj->", coul) - np.einsum("ijji->", coul)

    # h1'[pq] = h1[pq] + sum_i 2(pq|ii) - (pi|iq)
    h1_eff = h1 + 2.0 * np.einsum("pqii->pq", h2[:, :, fz, :][:, :, :, fz]) - np.einsum(
        "piiq->pq", h2[:, fz, :, :][:, :, fz, :]
    )

    active = [p for p in range(integrals.n_spatial) if p not in set(frozen)]
    act = np.array(active)
    return IntegralSet(
        len(active),
        integrals.n_electrons - 2 * len(frozen),
        integrals.ms2,
        float(core),
        h1_eff[np.ix_(act, act)].copy(),
        h2[np.ix_(act, act, act, act)].copy(),
    )
