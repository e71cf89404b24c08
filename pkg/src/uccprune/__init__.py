"""uccprune: UCCSD-VQE simulation with parameter-redundancy reduction.

Subpackages and modules are imported lazily by the consumer; the top level
re-exports the handful of entry points most scripts need.
"""

from __future__ import annotations

__version__ = "0.1.0"

__all__ = ["__version__"]
