"""Standalone STO-3G RHF driver generating FCIDUMP scan corpora.

This package is intentionally independent of the consumer: it talks to
the outside world only through FCIDUMP files, .meta.json sidecars, and
manifest.csv.
"""

__version__ = "1.0.0"

from .geometry import MOLECULES, build_geometry, grid
from .generate import generate_corpus, generate_point
from .scf import run_rhf

__all__ = [
    "MOLECULES",
    "build_geometry",
    "grid",
    "generate_corpus",
    "generate_point",
    "run_rhf",
]
