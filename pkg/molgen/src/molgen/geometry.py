"""Molecular geometries over fixed bond-length grids.

Each molecule scans one structural parameter over a 12-point grid.  All
grids are in angstrom; build_geometry returns coordinates in Bohr ready
for the integral code.

Structural conventions:
  h2, h4_linear, h6 — equally spaced chains on the x axis.
  h4_ring — four atoms on a circle of fixed radius R = 1.20 A forming a
      rectangle; the scan variable d is the shorter rectangle side, with
      half-angle beta = arcsin(d / 2R) and vertices at +-beta, pi -+ beta.
  lih — Li at the origin, H on the x axis.
  h2o — O at the origin, H-O-H angle fixed at 104.5 degrees, both O-H
      bonds scanned together; the bisector lies on the x axis.
"""

from dataclasses import dataclass

import numpy as np
from scipy.constants import physical_constants

ANG2BOHR = 1e-10 / physical_constants["Bohr radius"][0]

RING_RADIUS_ANG = 1.20
H2O_ANGLE_DEG = 104.5
N_GRID = 12


@dataclass(frozen=True)
class GeometrySpec:
    molecule: str
    grid_min: float
    grid_max: float
    n_electrons: int
    scan_parameter: str


SPECS = {
    "h2": GeometrySpec("h2", 0.5, 2.1, 2, "bond length"),
    "h4_linear": GeometrySpec("h4_linear", 0.5, 1.5, 4, "adjacent H-H distance"),
    "h4_ring": GeometrySpec("h4_ring", 0.5, 1.5, 4, "shorter rectangle side"),
    "h6": GeometrySpec("h6", 0.5, 3.2, 6, "adjacent H-H distance"),
    "lih": GeometrySpec("lih", 0.8, 4.0, 4, "Li-H distance"),
    "h2o": GeometrySpec("h2o", 0.65, 1.70, 10, "O-H distance"),
}

MOLECULES = tuple(SPECS)


def grid(molecule: str) -> np.ndarray:
    """The molecule's 12-point bond-length grid in angstrom."""
    spec = _spec(molecule)
    return np.linspace(spec.grid_min, spec.grid_max, N_GRID)


def _spec(molecule: str) -> GeometrySpec:
    key = molecule.lower()
    if key not in SPECS:
        known = ", ".join(MOLECULES)
        raise ValueError(f"unknown molecule {molecule!r}; known: {known}")
    return SPECS[key]


def _chain(n, d_bohr):
    return [("H", np.array([i * d_bohr, 0.0, 0.0])) for i in range(n)]


def build_geometry(molecule: str, bond_length: float):
    """Atom list [(symbol, xyz_bohr)] for one grid point.

    bond_length is in angstrom and must lie within the molecule's grid
    range (small tolerance for float endpoints).
    """
    spec = _spec(molecule)
    tol = 1e-9
    if not (spec.grid_min - tol <= bond_length <= spec.grid_max + tol):
        raise ValueError(
            f"{spec.molecule}: bond length {bond_length} A outside grid "
            f"range [{spec.grid_min}, {spec.grid_max}] A"
        )
    d = bond_length * ANG2BOHR

    if spec.molecule == "h2":
        return _chain(2, d)
    if spec.molecule == "h4_linear":
        return _chain(4, d)
    if spec.molecule == "h6":
        return _chain(6, d)
    if spec.molecule == "h4_ring":
        r = RING_RADIUS_ANG * ANG2BOHR
        beta = np.arcsin(d / (2.0 * r))
        angles = [beta, -beta, np.pi - beta, np.pi + beta]
        return [
            ("H", np.array([r * np.cos(t), r * np.sin(t), 0.0]))
            for t in angles
        ]
    if spec.molecule == "lih":
        return [
            ("Li", np.zeros(3)),
            ("H", np.array([d, 0.0, 0.0])),
        ]
    # h2o
    half = np.deg2rad(H2O_ANGLE_DEG) / 2.0
    return [
        ("O", np.zeros(3)),
        ("H", np.array([d * np.cos(half), d * np.sin(half), 0.0])),
        ("H", np.array([d * np.cos(half), -d * np.sin(half), 0.0])),
    ]
