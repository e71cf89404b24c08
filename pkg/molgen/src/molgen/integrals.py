"""McMurchie-Davidson molecular integrals over contracted Gaussians.

Hermite expansion coefficients E and Hermite Coulomb integrals R follow
the standard recurrences; the Boys function comes from the regularized
lower incomplete gamma. Supports s and p functions (any total angular
momentum in principle, the recurrences are general).
"""

import numpy as np
from scipy.special import gammainc, gammaln


def boys(m: int, t: float) -> float:
    if t < 1e-12:
        return 1.0 / (2 * m + 1)
    a = m + 0.5
    # F_m(t) = gamma(a)*P(a,t) / (2 t^a) with P the regularized lower gamma
    return float(np.exp(gammaln(a)) * gammainc(a, t) / (2.0 * t**a))


def _hermite_e(i, j, t, qx, a, b):
    """Coefficient E_t^{ij} of the two-center Gaussian product expansion."""
    p = a + b
    q = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return np.exp(-q * qx * qx)
    if j == 0:
        return (
            _hermite_e(i - 1, j, t - 1, qx, a, b) / (2 * p)
            - q * qx / a * _hermite_e(i - 1, j, t, qx, a, b)
            + (t + 1) * _hermite_e(i - 1, j, t + 1, qx, a, b)
        )
    return (
        _hermite_e(i, j - 1, t - 1, qx, a, b) / (2 * p)
        + q * qx / b * _hermite_e(i, j - 1, t, qx, a, b)
        + (t + 1) * _hermite_e(i, j - 1, t + 1, qx, a, b)
    )


def overlap_primitive(a, lmn1, center_a, b, lmn2, center_b) -> float:
    l1, m1, n1 = lmn1
    l2, m2, n2 = lmn2
    p = a + b
    d = np.asarray(center_a) - np.asarray(center_b)
    sx = _hermite_e(l1, l2, 0, d[0], a, b)
    sy = _hermite_e(m1, m2, 0, d[1], a, b)
    sz = _hermite_e(n1, n2, 0, d[2], a, b)
    return sx * sy * sz * (np.pi / p) ** 1.5


def kinetic_primitive(a, lmn1, center_a, b, lmn2, center_b) -> float:
    l2, m2, n2 = lmn2

    def s(dl, dm, dn):
        lmn = (l2 + dl, m2 + dm, n2 + dn)
        if min(lmn) < 0:
            return 0.0
        return overlap_primitive(a, lmn1, center_a, b, lmn, center_b)

    term0 = b * (2 * (l2 + m2 + n2) + 3) * s(0, 0, 0)
    term1 = -2 * b * b * (s(2, 0, 0) + s(0, 2, 0) + s(0, 0, 2))
    term2 = -0.5 * (
        l2 * (l2 - 1) * s(-2, 0, 0)
        + m2 * (m2 - 1) * s(0, -2, 0)
        + n2 * (n2 - 1) * s(0, 0, -2)
    )
    return term0 + term1 + term2


class _HermiteCoulomb:
    """Memoized R^n_{tuv}: Boys-function derivatives along Hermite directions."""

    def __init__(self, p, pc):
        self.p = p
        self.pc = np.asarray(pc, dtype=np.float64)
        self.t_arg = p * float(np.dot(self.pc, self.pc))
        self._memo = {}

    def __call__(self, t, u, v, n=0):
        key = (t, u, v, n)
        if key in self._memo:
            return self._memo[key]
        if t == u == v == 0:
            val = (-2.0 * self.p) ** n * boys(n, self.t_arg)
        elif t > 0:
            val = self.pc[0] * self(t - 1, u, v, n + 1)
            if t > 1:
                val += (t - 1) * self(t - 2, u, v, n + 1)
        elif u > 0:
            val = self.pc[1] * self(t, u - 1, v, n + 1)
            if u > 1:
                val += (u - 1) * self(t, u - 2, v, n + 1)
        else:
            val = self.pc[2] * self(t, u, v - 1, n + 1)
            if v > 1:
                val += (v - 1) * self(t, u, v - 2, n + 1)
        self._memo[key] = val
        return val


def _hermite_coulomb(t, u, v, n, p, pc):
    return _HermiteCoulomb(p, pc)(t, u, v, n)


def nuclear_primitive(a, lmn1, center_a, b, lmn2, center_b, center_c) -> float:
    """Attraction to a unit charge at center_c (positive integral)."""
    l1, m1, n1 = lmn1
    l2, m2, n2 = lmn2
    p = a + b
    pxyz = (a * np.asarray(center_a) + b * np.asarray(center_b)) / p
    d = np.asarray(center_a) - np.asarray(center_b)
    pc = pxyz - np.asarray(center_c)
    ex = [_hermite_e(l1, l2, t, d[0], a, b) for t in range(l1 + l2 + 1)]
    ey = [_hermite_e(m1, m2, u, d[1], a, b) for u in range(m1 + m2 + 1)]
    ez = [_hermite_e(n1, n2, v, d[2], a, b) for v in range(n1 + n2 + 1)]
    r = _HermiteCoulomb(p, pc)
    total = 0.0
    for t, cx in enumerate(ex):
        for u, cy in enumerate(ey):
            for v, cz in enumerate(ez):
                total += cx * cy * cz * r(t, u, v)
    return 2.0 * np.pi / p * total


def eri_primitive(a, lmn1, ca, b, lmn2, cb, c, lmn3, cc, d, lmn4, cd) -> float:
    """(ab|cd) in chemists' notation over primitive Gaussians."""
    l1, m1, n1 = lmn1
    l2, m2, n2 = lmn2
    l3, m3, n3 = lmn3
    l4, m4, n4 = lmn4
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    pxyz = (a * np.asarray(ca) + b * np.asarray(cb)) / p
    qxyz = (c * np.asarray(cc) + d * np.asarray(cd)) / q
    pq = pxyz - qxyz
    dab = np.asarray(ca) - np.asarray(cb)
    dcd = np.asarray(cc) - np.asarray(cd)
    e1x = [_hermite_e(l1, l2, t, dab[0], a, b) for t in range(l1 + l2 + 1)]
    e1y = [_hermite_e(m1, m2, u, dab[1], a, b) for u in range(m1 + m2 + 1)]
    e1z = [_hermite_e(n1, n2, v, dab[2], a, b) for v in range(n1 + n2 + 1)]
    e2x = [_hermite_e(l3, l4, t, dcd[0], c, d) for t in range(l3 + l4 + 1)]
    e2y = [_hermite_e(m3, m4, u, dcd[1], c, d) for u in range(m3 + m4 + 1)]
    e2z = [_hermite_e(n3, n4, v, dcd[2], c, d) for v in range(n3 + n4 + 1)]
    r = _HermiteCoulomb(alpha, pq)
    total = 0.0
    for t, c1x in enumerate(e1x):
        for u, c1y in enumerate(e1y):
            for v, c1z in enumerate(e1z):
                coeff1 = c1x * c1y * c1z
                if coeff1 == 0.0:
                    continue
                for tt, c2x in enumerate(e2x):
                    for uu, c2y in enumerate(e2y):
                        for vv, c2z in enumerate(e2z):
                            coeff2 = c2x * c2y * c2z
                            if coeff2 == 0.0:
                                continue
                            total += (
                                coeff1
                                * coeff2
                                * (-1) ** (tt + uu + vv)
                                * r(t + tt, u + uu, v + vv)
                            )
    return total * 2.0 * np.pi**2.5 / (p * q * np.sqrt(p + q))


def _contract2(func, bf1, bf2, *extra):
    total = 0.0
    for c1, a1 in zip(bf1.coefficients, bf1.exponents):
        for c2, a2 in zip(bf2.coefficients, bf2.exponents):
            total += c1 * c2 * func(
                a1, bf1.lmn, bf1.center, a2, bf2.lmn, bf2.center, *extra
            )
    return total


def overlap_matrix(basis):
    n = len(basis)
    s = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            s[i, j] = s[j, i] = _contract2(overlap_primitive, basis[i], basis[j])
    return s


def kinetic_matrix(basis):
    n = len(basis)
    t = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            t[i, j] = t[j, i] = _contract2(kinetic_primitive, basis[i], basis[j])
    return t


def nuclear_matrix(basis, atoms, charges):
    n = len(basis)
    v = np.zeros((n, n))
    for symbol, xyz in atoms:
        z = charges[symbol]
        for i in range(n):
            for j in range(i + 1):
                v[i, j] -= z * _contract2(
                    nuclear_primitive, basis[i], basis[j], np.asarray(xyz)
                )
    return np.tril(v) + np.tril(v, -1).T


def eri_tensor(basis):
    """(ij|kl) chemists' notation with full 8-fold symmetry."""
    n = len(basis)
    eri = np.zeros((n, n, n, n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1)]
    for a, (i, j) in enumerate(pairs):
        for i2, j2 in pairs[: a + 1]:
            val = 0.0
            b1, b2, b3, b4 = basis[i], basis[j], basis[i2], basis[j2]
            for c1, a1 in zip(b1.coefficients, b1.exponents):
                for c2, a2 in zip(b2.coefficients, b2.exponents):
                    for c3, a3 in zip(b3.coefficients, b3.exponents):
                        for c4, a4 in zip(b4.coefficients, b4.exponents):
                            val += c1 * c2 * c3 * c4 * eri_primitive(
                                a1, b1.lmn, b1.center, a2, b2.lmn, b2.center,
                                a3, b3.lmn, b3.center, a4, b4.lmn, b4.center,
                            )
            for p, q in ((i, j), (j, i)):
                for r, s in ((i2, j2), (j2, i2)):
                    eri[p, q, r, s] = eri[r, s, p, q] = val
    return eri
