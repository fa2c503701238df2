"""SU(2) lattice gauge fields: Monte Carlo generation, digitization of
links onto coarse codebooks, and measurement of the induced error in
Wilson-loop observables.  Doubles as a lossy codec for gauge-link data.
"""

from . import analysis, digitize, lattice, lattice_io, montecarlo, observables, su2
from .digitize import (
    FixedPointSpec,
    Mesh,
    fixed_point_truncate,
    gen_edgewise_mesh,
    gen_subgroup,
    project_apr,
    project_fixed_point,
    project_l2,
)
from .lattice import GaugeField, LatticeGeometry
from .montecarlo import RunParams, generate_ensemble, trajectory
from .rng import SplitMix64

__version__ = "0.1.0"

__all__ = [
    "analysis",
    "digitize",
    "lattice",
    "lattice_io",
    "montecarlo",
    "observables",
    "su2",
    "FixedPointSpec",
    "Mesh",
    "fixed_point_truncate",
    "gen_edgewise_mesh",
    "gen_subgroup",
    "project_apr",
    "project_fixed_point",
    "project_l2",
    "GaugeField",
    "LatticeGeometry",
    "RunParams",
    "generate_ensemble",
    "trajectory",
    "SplitMix64",
]
