"""STO-3G basis data and contracted-shell expansion.

Exponents and contraction coefficients are the standard published STO-3G
parameters. SP shells share exponents between their s and p contractions.
Primitives are normalized Cartesian Gaussians; each contraction is
renormalized to unit self-overlap.
"""

import numpy as np

# element -> list of shells; each shell: (angular momenta, exponents, coeffs)
# an SP entry expands into one s and one p shell with shared exponents
_STO3G = {
    "H": [
        ("S", [3.42525091, 0.62391373, 0.16885540],
              [0.15432897, 0.53532814, 0.44463454]),
    ],
    "Li": [
        ("S", [16.1195750, 2.9362007, 0.7946505],
              [0.15432897, 0.53532814, 0.44463454]),
        ("SP", [0.6362897, 0.1478601, 0.0480887],
               ([-0.09996723, 0.39951283, 0.70011547],
                [0.15591627, 0.60768372, 0.39195739])),
    ],
    "O": [
        ("S", [130.7093200, 23.8088610, 6.4436083],
              [0.15432897, 0.53532814, 0.44463454]),
        ("SP", [5.0331513, 1.1695961, 0.3803890],
               ([-0.09996723, 0.39951283, 0.70011547],
                [0.15591627, 0.60768372, 0.39195739])),
    ],
}

CHARGES = {"H": 1, "Li": 3, "O": 8}

_CART = {0: [(0, 0, 0)], 1: [(1, 0, 0), (0, 1, 0), (0, 0, 1)]}


def _double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def _primitive_norm(alpha: float, lmn) -> float:
    l, m, n = lmn
    L = l + m + n
    pre = (2.0 * alpha / np.pi) ** 0.75 * (4.0 * alpha) ** (L / 2.0)
    den = np.sqrt(
        _double_factorial(2 * l - 1)
        * _double_factorial(2 * m - 1)
        * _double_factorial(2 * n - 1)
    )
    return pre / den


class BasisFunction:
    """One contracted Cartesian Gaussian: sum_k c_k N_k exp(-a_k r^2) x^l y^m z^n."""

    def __init__(self, center, lmn, exponents, coefficients):
        self.center = np.asarray(center, dtype=np.float64)
        self.lmn = tuple(lmn)
        self.exponents = np.asarray(exponents, dtype=np.float64)
        norms = np.array([_primitive_norm(a, lmn) for a in self.exponents])
        self.coefficients = np.asarray(coefficients, dtype=np.float64) * norms
        self._renormalize()

    def _renormalize(self):
        from .integrals import overlap_primitive

        total = 0.0
        for ci, ai in zip(self.coefficients, self.exponents):
            for cj, aj in zip(self.coefficients, self.exponents):
                total += ci * cj * overlap_primitive(
                    ai, self.lmn, self.center, aj, self.lmn, self.center
                )
        self.coefficients = self.coefficients / np.sqrt(total)


def build_basis(atoms):
    """atoms: list of (symbol, xyz in Bohr) -> list of BasisFunction.

    Functions are ordered atom by atom, shells in the element's table
    order, Cartesian components x, y, z within a p shell.
    """
    functions = []
    for symbol, xyz in atoms:
        if symbol not in _STO3G:
            raise ValueError(f"no STO-3G parameters for element {symbol!r}")
        for shell in _STO3G[symbol]:
            kind, exponents, coeffs = shell
            if kind == "S":
                functions.append(BasisFunction(xyz, (0, 0, 0), exponents, coeffs))
            elif kind == "SP":
                s_coeffs, p_coeffs = coeffs
                functions.append(BasisFunction(xyz, (0, 0, 0), exponents, s_coeffs))
                for lmn in _CART[1]:
                    functions.append(BasisFunction(xyz, lmn, exponents, p_coeffs))
            else:
                raise ValueError(f"unsupported shell kind {kind!r}")
    return functions


def n_basis_functions(symbols) -> int:
    counts = {"H": 1, "Li": 5, "O": 5}
    return sum(counts[s] for s in symbols)
