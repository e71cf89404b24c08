"""Pauli-string algebra in symplectic (x-bits, z-bits) bitmask form.

A Pauli string is stored as two integer bitmasks: bit q of ``x`` set means an
X factor on qubit q, bit q of ``z`` set means a Z factor, and both set means
Y.  The operator represented is the Hermitian product

    P(x, z) = i**popcount(x & z) * X^x * Z^z,

which carries Y (= i X Z) on every overlap bit.  Products of two strings are
again a single string times a phase in {1, i, -1, -i}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# i**k for k = 0..3
_PHASE = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)

_SINGLE = {
    (0, 0): np.eye(2, dtype=complex),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
    (1, 1): np.array([[0, -1j], [1j, 0]], dtype=complex),
}

_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


@dataclass(frozen=True, slots=True)
class PauliString:
    """One Pauli string as an (x-bits, z-bits) pair."""

    x: int
    z: int

    @property
    def phase_exponent(self) -> int:
        """Exponent k of the i**k prefactor relating X^x Z^z to this string."""
        return (self.x & self.z).bit_count() % 4

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def n_qubits(self) -> int:
        return max(self.x.bit_length(), self.z.bit_length())

    def commutes(self, other: "PauliString") -> bool:
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def mul(self, other: "PauliString") -> tuple["PauliString", complex]:
        """Product self*other as (string, phase), phase in {1, i, -1, -i}."""
        x3 = self.x ^ other.x
        z3 = self.z ^ other.z
        k = (
            self.phase_exponent
            + other.phase_exponent
            - (x3 & z3).bit_count()
            + 2 * (self.z & other.x).bit_count()
        ) % 4
        return PauliString(x3, z3), _PHASE[k]

    def label(self) -> str:
        """Human-readable form like ``X0 Z2 Y5``; identity is ``I``."""
        if self.is_identity():
            return "I"
        parts = []
        for q in range(self.n_qubits()):
            key = ((self.x >> q) & 1, (self.z >> q) & 1)
            if key != (0, 0):
                parts.append(f"{_LETTER[key]}{q}")
        return " ".join(parts)

    def to_matrix(self, n_qubits: int) -> np.ndarray:
        """Dense 2^n x 2^n matrix; qubit q is bit q of the basis index."""
        m = np.ones((1, 1), dtype=complex)
        for q in range(n_qubits):
            key = ((self.x >> q) & 1, (self.z >> q) & 1)
            # bit q is the fast-running index, so new factors go on the left
            m = np.kron(_SINGLE[key], m)
        return m


IDENTITY = PauliString(0, 0)


class QubitOperator:
    """Weighted sum of Pauli strings.

    Terms live in a dict keyed by PauliString.  Arithmetic compresses away
    coefficients below ``COMPRESS_TOL``.
    """

    COMPRESS_TOL = 1e-14

    __slots__ = ("terms",)

    def __init__(self, terms: dict[PauliString, complex] | None = None):
        self.terms: dict[PauliString, complex] = dict(terms) if terms else {}

    @classmethod
    def zero(cls) -> "QubitOperator":
        return cls()

    @classmethod
    def identity(cls, coeff: complex = 1.0) -> "QubitOperator":
        return cls({IDENTITY: complex(coeff)})

    @classmethod
    def from_term(cls, p: PauliString, coeff: complex = 1.0) -> "QubitOperator":
        return cls({p: complex(coeff)})

    def copy(self) -> "QubitOperator":
        return QubitOperator(self.terms)

    @property
    def n_qubits(self) -> int:
        return max((p.n_qubits() for p in self.terms), default=0)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "QubitOperator") -> "QubitOperator":
        out = QubitOperator(self.terms)
        out += other
        return out

    def __iadd__(self, other: "QubitOperator") -> "QubitOperator":
        for p, c in other.terms.items():
            self.terms[p] = self.terms.get(p, 0.0) + c
        return self

    def __sub__(self, other: "QubitOperator") -> "QubitOperator":
        return self + (other * -1.0)

    def __mul__(self, scalar: complex) -> "QubitOperator":
        return QubitOperator({p: c * scalar for p, c in self.terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "QubitOperator") -> "QubitOperator":
        """Operator product, expanded term by term."""
        out: dict[PauliString, complex] = {}
        for p1, c1 in self.terms.items():
            for p2, c2 in other.terms.items():
                p3, ph = p1.mul(p2)
                out[p3] = out.get(p3, 0.0) + c1 * c2 * ph
        result = QubitOperator(out)
        result.compress()
        return result

    def dagger(self) -> "QubitOperator":
        return QubitOperator({p: c.conjugate() for p, c in self.terms.items()})

    def compress(self, tol: float | None = None) -> "QubitOperator":
        tol = self.COMPRESS_TOL if tol is None else tol
        self.terms = {p: c for p, c in self.terms.items() if abs(c) > tol}
        return self

    def norm(self) -> float:
        """Frobenius-like coefficient 2-norm (Pauli strings are orthogonal)."""
        return math.sqrt(sum(abs(c) ** 2 for c in self.terms.values()))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    def is_anti_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.real) <= tol for c in self.terms.values())

    def to_matrix(self, n_qubits: int | None = None) -> np.ndarray:
        n = self.n_qubits if n_qubits is None else n_qubits
        dim = 1 << n
        m = np.zeros((dim, dim), dtype=complex)
        for p, c in self.terms.items():
            m += c * p.to_matrix(n)
        return m

    def serialize(self) -> str:
        """Deterministic text form: one ``(re,im) label`` line per term,
        sorted by (x, z)."""
        lines = []
        for p in sorted(self.terms, key=lambda s: (s.x, s.z)):
            c = self.terms[p]
            lines.append(f"({c.real:.17g},{c.imag:.17g}) {p.label()}")
        return "\n".join(lines)

    def __repr__(self) -> str:
        if not self.terms:
            return "QubitOperator(0)"
        return f"QubitOperator({len(self.terms)} terms, {self.n_qubits} qubits)"


def commutator(a: QubitOperator, b: QubitOperator) -> QubitOperator:
    return (a @ b) - (b @ a)
