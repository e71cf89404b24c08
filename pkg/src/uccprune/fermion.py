"""Excitation enumeration, spin adaptation, and the Jordan-Wigner map.

Spin-orbital convention: block ordering, alpha spin orbitals occupy
indices 0..M-1 and beta M..2M-1 for M spatial orbitals; qubit q holds
spin orbital q. Excitation lists are doubles first, then singles, each
block lexicographic in its index tuple. That order is also the Trotter
application order, fixed once so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ContractViolation
from .fcidump import IntegralSet
from .pauli import IDENTITY, PauliString, QubitOperator

_H_TERM_TOL = 1e-14


@dataclass(frozen=True, slots=True)
class Excitation:
    """Spin-conserving excitation in spin-orbital indices, occ -> virt.

    occ and virt are ascending tuples of length 1 (single) or 2 (double).
    """

    occ: tuple
    virt: tuple

    @property
    def kind(self) -> str:
        return "single" if len(self.occ) == 1 else "double"

    def is_spin_conserving(self, n_spatial: int) -> bool:
        alpha = lambda p: p < n_spatial
        return sum(map(alpha, self.occ)) == sum(map(alpha, self.virt))

    def __repr__(self):
        o = ",".join(map(str, self.occ))
        v = ",".join(map(str, self.virt))
        return f"Excitation({o}->{v})"


def enumerate_excitations(n_occ: int, n_virt: int) -> list[Excitation]:
    """All spin-conserving singles and S_z-conserving doubles.

    Doubles first, then singles, lexicographic within each block; the
    count obeys 2ov + o^2 v^2 + 2 C(o,2) C(v,2).
    """
    if n_occ <= 0 or n_virt <= 0:
        raise ValueError("need at least one occupied and one virtual orbital")
    m = n_occ + n_virt
    occ_so = list(range(n_occ)) + list(range(m, m + n_occ))
    virt_so = list(range(n_occ, m)) + list(range(m + n_occ, m + n_occ + n_virt))
    occ_so.sort()
    virt_so.sort()

    alpha = lambda p: p < m
    out = []
    for i, j in combinations(occ_so, 2):
        for a, b in combinations(virt_so, 2):
            if alpha(i) + alpha(j) == alpha(a) + alpha(b):
                out.append(Excitation((i, j), (a, b)))
    for i in occ_so:
        for a in virt_so:
            if alpha(i) == alpha(a):
                out.append(Excitation((i,), (a,)))
    return out


class ParameterMap:
    """Linear map from independent parameters theta to excitation amplitudes.

    rows[k] is a tuple of (parameter_index, coefficient) pairs; the
    amplitude of excitation k is the corresponding sparse dot product.
    """

    __slots__ = ("n_independent", "rows")

    def __init__(self, n_independent: int, rows):
        self.n_independent = n_independent
        self.rows = [tuple(r) for r in rows]

    @classmethod
    def identity(cls, n: int) -> "ParameterMap":
        return cls(n, [((k, 1.0),) for k in range(n)])

    def __len__(self) -> int:
        return len(self.rows)

    def amplitudes(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.n_independent,):
            raise ValueError(f"theta length {theta.shape}, expected ({self.n_independent},)")
        out = np.zeros(len(self.rows))
        for k, row in enumerate(self.rows):
            out[k] = sum(c * theta[idx] for idx, c in row)
        return out

    def project_gradient(self, d_amp: np.ndarray) -> np.ndarray:
        """Transpose action: pull a gradient over amplitudes back to theta."""
        out = np.zeros(self.n_independent)
        for k, row in enumerate(self.rows):
            for idx, c in row:
                out[idx] += c * d_amp[k]
        return out

    def as_matrix(self) -> np.ndarray:
        mat = np.zeros((len(self.rows), self.n_independent))
        for k, row in enumerate(self.rows):
            for idx, c in row:
                mat[k, idx] = c
        return mat

    def restrict(self, kept_params) -> tuple["ParameterMap", list[int]]:
        """Drop all parameters not in kept_params.

        Returns the reduced map plus the indices of surviving excitations
        (rows that still reference at least one kept parameter). Row
        entries for dropped parameters are removed; an excitation whose
        row empties out is removed from the ansatz entirely.
        """
        kept = sorted(set(int(k) for k in kept_params))
        renumber = {old: new for new, old in enumerate(kept)}
        rows = []
        exc_kept = []
        for k, row in enumerate(self.rows):
            new_row = tuple((renumber[idx], c) for idx, c in row if idx in renumber)
            if new_row:
                rows.append(new_row)
                exc_kept.append(k)
        return ParameterMap(len(kept), rows), exc_kept


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, key):
        parent = self.parent
        if key not in parent:
            parent[key] = key
            return key
        root = key
        while parent[root] != root:
            root = parent[root]
        while parent[key] != root:
            parent[key], key = root, parent[key]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _class_key(exc: Excitation, m: int):
    """Constraint-class key for a parameter-carrying excitation.

    Singles of both flavors share one spatial key. A mixed-spin double
    occ=(i_a, j_b), virt=(x_a, y_b) is keyed by spatial (i, j, x, y);
    same-spin doubles carry no parameter of their own and return None.
    """
    if len(exc.occ) == 1:
        return ("s", exc.occ[0] % m, exc.virt[0] % m)
    (i, j), (a, b) = exc.occ, exc.virt
    n_alpha_occ = (i < m) + (j < m)
    if n_alpha_occ != 1:
        return None
    return ("d", i % m, j % m, a % m, b % m)


def spin_adapt(excitations, n_spatial: int) -> ParameterMap:
    """Closed-shell spin-adaptation map over the given excitation list.

    Independent parameters: one per spatial single (both flavors merged),
    and one per mixed-spin double class modulo the pairing
    (i,j,a,b) ~ (j,i,b,a). Same-spin double amplitudes combine their two
    mixed-spin partner parameters; under the canonical ascending operator
    ordering of enumerate_excitations the second partner enters with a
    minus sign (the sign is convention: reordering a+_ab+_b swaps it),
    so row coefficients are 0 or +-1. The class structure is built by
    union-find over the pairing graph; tests cross-check n_independent
    against the numerical rank of the full constraint matrix and the
    combination sign against converged unconstrained amplitudes.
    """
    m = n_spatial
    for exc in excitations:
        if not exc.is_spin_conserving(m):
            raise ContractViolation(f"{exc!r} does not conserve spin")

    uf = _UnionFind()
    for exc in excitations:
        key = _class_key(exc, m)
        if key is None:
            continue
        uf.find(key)
        if key[0] == "d":
            _, i, j, a, b = key
            uf.union(key, ("d", j, i, b, a))

    root_param: dict = {}
    counter = 0
    for exc in excitations:
        key = _class_key(exc, m)
        if key is None:
            continue
        root = uf.find(key)
        if root not in root_param:
            root_param[root] = counter
            counter += 1

    rows = []
    for exc in excitations:
        key = _class_key(exc, m)
        if key is not None:
            rows.append(((root_param[uf.find(key)], 1.0),))
            continue
        # same-spin double: antisymmetric combination of the two
        # mixed-spin partners in the canonical operator ordering
        (i, j), (a, b) = exc.occ, exc.virt
        si, sj, sa, sb = i % m, j % m, a % m, b % m
        p1 = root_param[uf.find(("d", si, sj, sa, sb))]
        p2 = root_param[uf.find(("d", si, sj, sb, sa))]
        rows.append(((p1, 1.0), (p2, -1.0)))
    return ParameterMap(counter, rows)


def _ladder(p: int, dagger: bool) -> QubitOperator:
    tail = (1 << p) - 1
    xp = PauliString(1 << p, tail)
    yp = PauliString(1 << p, tail | (1 << p))
    return QubitOperator({xp: 0.5, yp: -0.5j if dagger else 0.5j})


def jordan_wigner(ops, coefficient: complex = 1.0) -> QubitOperator:
    """Map a product of ladder operators to a QubitOperator.

    ops is a sequence of (spin_orbital, dagger) pairs, leftmost factor
    first: jordan_wigner([(p, True), (q, False)]) is a+_p a_q.
    """
    out = QubitOperator.identity(coefficient)
    for p, dagger in ops:
        out = out @ _ladder(int(p), bool(dagger))
    return out.compress()


def build_qubit_hamiltonian(integrals: IntegralSet) -> QubitOperator:
    """Second-quantized Hamiltonian under Jordan-Wigner.

    H = core + sum_pq,s h1[pq] a+_ps a_qs
             + 1/2 sum_pqrs,st (pq|rs) a+_ps a+_rt a_st a_qs
    with s, t spin flavors and all indices spatial.
    """
    m = integrals.n_spatial
    ladders = [[_ladder(p, False), _ladder(p, True)] for p in range(2 * m)]

    def product(op_list, coeff):
        out = QubitOperator.identity(coeff)
        for p, dagger in op_list:
            out = out @ ladders[p][dagger]
        return out

    h = QubitOperator.identity(integrals.core_energy)
    h1, h2 = integrals.h1, integrals.h2
    for p in range(m):
        for q in range(m):
            v = h1[p, q]
            if abs(v) < _H_TERM_TOL:
                continue
            for s in (0, m):
                h += product(((p + s, 1), (q + s, 0)), v)
    for p in range(m):
        for q in range(m):
            for r in range(m):
                for s in range(m):
                    v = h2[p, q, r, s]
                    if abs(v) < _H_TERM_TOL:
                        continue
                    for sp in (0, m):
                        for tp in (0, m):
                            h += product(
                                ((p + sp, 1), (r + tp, 1), (s + tp, 0), (q + sp, 0)),
                                0.5 * v,
                            )
    return h.compress()


def generator_for(exc: Excitation) -> QubitOperator:
    """Anti-Hermitian generator tau - tau+ for one excitation.

    tau = a+_a a_i for singles and a+_a a+_b a_j a_i for doubles with
    occ=(i,j), virt=(a,b). All Pauli terms of one generator mutually
    commute, so its exponential factorizes exactly.
    """
    if exc.kind == "single":
        (i,), (a,) = exc.occ, exc.virt
        tau = jordan_wigner(((a, 1), (i, 0)))
    else:
        (i, j), (a, b) = exc.occ, exc.virt
        tau = jordan_wigner(((a, 1), (b, 1), (j, 0), (i, 0)))
    return (tau - tau.dagger()).compress()


def number_operator(n_qubits: int) -> QubitOperator:
    """Total particle number sum_p (I - Z_p)/2."""
    out = QubitOperator.identity(0.5 * n_qubits)
    for p in range(n_qubits):
        out += QubitOperator.from_term(PauliString(0, 1 << p), -0.5)
    return out


def sz_operator(n_spatial: int) -> QubitOperator:
    """Total S_z = (N_alpha - N_beta) / 2 in the block convention."""
    out = QubitOperator.zero()
    for p in range(n_spatial):
        out += QubitOperator.from_term(PauliString(0, 1 << p), -0.25)
        out += QubitOperator.from_term(PauliString(0, 1 << (p + n_spatial)), 0.25)
    return out


def s_squared_operator(n_spatial: int) -> QubitOperator:
    """Total spin S^2 = S+ S- + S_z^2 - S_z."""
    m = n_spatial
    s_plus = QubitOperator.zero()
    for p in range(m):
        s_plus += jordan_wigner(((p, 1), (p + m, 0)))
    sz = sz_operator(m)
    return (s_plus @ s_plus.dagger() + sz @ sz - sz).compress()
