"""Kernel backend selection: compiled Cython core with a numpy fallback.

``UCCPRUNE_KERNELS=numpy`` forces the fallback; ``UCCPRUNE_KERNELS=compiled``
makes a missing extension a hard error instead of a silent downgrade.
"""

from __future__ import annotations

import os
import warnings

_requested = os.environ.get("UCCPRUNE_KERNELS", "").strip().lower()

if _requested == "numpy":
    from . import fallback as impl

    BACKEND = "numpy"
else:
    try:
        from . import _core as impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import fallback as impl  # type: ignore[no-redef]

        BACKEND = "numpy"
        warnings.warn(
            "compiled statevector kernels not available; using the slower "
            "numpy fallback (build with `pip install -e . --no-build-isolation`)",
            stacklevel=2,
        )

rotate_paulis = impl.rotate_paulis
pauli_action = impl.pauli_action
pauli_expectation = impl.pauli_expectation
xor_diag_action = impl.xor_diag_action
xor_diag_expectation = impl.xor_diag_expectation


def get_backend() -> str:
    return BACKEND
