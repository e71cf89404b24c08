"""Pure-numpy statevector kernels.

Same call surface as the compiled ``_core`` extension; used when the
extension is not built or when ``UCCPRUNE_KERNELS=numpy`` forces it.

All kernels treat a state as a contiguous complex128 vector of length 2^n,
with qubit q living on bit q of the basis index.  A Pauli string arrives as
(x, z, jp) where jp = popcount(x & z) mod 4 is the exponent of the i**jp
prefactor that turns X^x Z^z into the Hermitian string.
"""

from __future__ import annotations

import numpy as np

_PHASE = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)

_iota_cache: dict[int, np.ndarray] = {}


def _iota(n_states: int) -> np.ndarray:
    arr = _iota_cache.get(n_states)
    if arr is None:
        arr = np.arange(n_states, dtype=np.int64)
        _iota_cache[n_states] = arr
    return arr


def _parity(values: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(values) & 1).astype(np.int8)


def _pair_indices(n_states: int, x: int) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (b, b^x) with the top set bit of x clear in b."""
    hb = 1 << (int(x).bit_length() - 1)
    half = _iota(n_states >> 1)
    low = half & (hb - 1)
    b = ((half ^ low) << 1) | low
    return b, b ^ x


def rotate_paulis(psi, xs, zs, jps, angles):
    """In-place product of exp(i * angle_k * P_k), k applied in array order."""
    n_states = psi.shape[0]
    for k in range(xs.shape[0]):
        x = int(xs[k])
        z = int(zs[k])
        c = np.cos(angles[k])
        s = np.sin(angles[k])
        if x == 0:
            sign = 1.0 - 2.0 * _parity(_iota(n_states) & z)
            psi *= c + 1j * s * sign
        else:
            ph = _PHASE[int(jps[k])]
            b, p = _pair_indices(n_states, x)
            sb = 1.0 - 2.0 * _parity(b & z)
            sp = 1.0 - 2.0 * _parity(p & z)
            a = psi[b]
            d = psi[p]
            psi[b] = c * a + 1j * s * ph * sp * d
            psi[p] = c * d + 1j * s * ph * sb * a
    return psi


def pauli_action(psi, out, xs, zs, coeffs):
    """out += sum_k coeff_k * X^x Z^z |psi> (raw, no i**jp folded in)."""
    n_states = psi.shape[0]
    iota = _iota(n_states)
    for k in range(xs.shape[0]):
        x = int(xs[k])
        z = int(zs[k])
        sign = 1.0 - 2.0 * _parity(iota & z)
        contrib = coeffs[k] * sign * psi
        if x == 0:
            out += contrib
        else:
            out[iota ^ x] += contrib
    return out


def pauli_expectation(psi, x, z):
    """<psi| X^x Z^z |psi> (raw; caller folds in i**jp and the coefficient)."""
    n_states = psi.shape[0]
    iota = _iota(n_states)
    sign = 1.0 - 2.0 * _parity(iota & z)
    if x == 0:
        return complex(np.vdot(psi, sign * psi))
    return complex(np.vdot(psi[iota ^ int(x)], sign * psi))


def xor_diag_action(psi, out, xs, diags):
    """out[b ^ x_g] += diags[g, b] * psi[b], one XOR-diagonal per group."""
    n_states = psi.shape[0]
    iota = _iota(n_states)
    for g in range(xs.shape[0]):
        x = int(xs[g])
        if x == 0:
            out += diags[g] * psi
        else:
            out[iota ^ x] += diags[g] * psi
    return out


def xor_diag_expectation(psi, xs, diags):
    """sum_g <psi| P_g |psi> for XOR-diagonal groups; complex result."""
    n_states = psi.shape[0]
    iota = _iota(n_states)
    acc = 0.0 + 0.0j
    for g in range(xs.shape[0]):
        x = int(xs[g])
        if x == 0:
            acc += np.vdot(psi, diags[g] * psi)
        else:
            acc += np.vdot(psi[iota ^ x], diags[g] * psi)
    return complex(acc)
