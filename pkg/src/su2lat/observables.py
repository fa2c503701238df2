"""Wilson-loop observables.

Every loop trace is normalized by the number of colors (2), so all
observables live in [-1, 1] and a cold field gives exactly 1.  Per-site
values are averaged over the lattice and over a fixed enumeration of
orientations:

* plaquette: the 6 unordered planes;
* perimeter-six loops: the 2x1 rectangle over the 12 ordered direction
  pairs, the parallelogram and the bent rectangle over all 24 ordered
  triples of distinct directions;
* Polyakov loop: absolute value of the spatial average of the traced
  temporal winding line;
* r x t rectangles: one side along T, averaged over the 3 spatial axes.
"""

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import su2
from .errors import InvalidPlaneError
from .lattice import T, plaquette_field

__all__ = [
    "LoopPath",
    "MeasurementRecord",
    "loop_field",
    "avg_plaquette",
    "loops6",
    "polyakov",
    "polyakov_field",
    "wilson_rect",
    "wilson_table",
    "measure_config",
]


@dataclass(frozen=True)
class LoopPath:
    """Closed path of (direction, sign) steps on the lattice."""

    steps: tuple

    def __post_init__(self):
        disp = [0, 0, 0, 0]
        for mu, sign in self.steps:
            disp[mu] += sign
        if any(disp):
            raise ValueError(f"path does not close: net displacement {disp}")

    @classmethod
    def rectangle(cls, mu, nu, a, b):
        """a steps along mu, b along nu, back and back."""
        if mu == nu:
            raise InvalidPlaneError("rectangle needs two distinct directions")
        steps = [(mu, +1)] * a + [(nu, +1)] * b + [(mu, -1)] * a + [(nu, -1)] * b
        return cls(tuple(steps))


def loop_field(field, path):
    """Half the Re-trace of the loop product, based at every site: shape (V,)."""
    if not isinstance(path, LoopPath):
        path = LoopPath(tuple(path))
    g = field.geometry
    U = field.links
    cur = np.arange(g.volume)
    prod = None
    for mu, sign in path.steps:
        if sign > 0:
            leg = U[cur, mu]
            cur = g.fwd[cur, mu]
        else:
            cur = g.bwd[cur, mu]
            leg = su2.dagger(U[cur, mu])
        prod = leg if prod is None else su2.multiply(prod, leg)
    return prod[:, 0]


def avg_plaquette(field):
    """Mean of half the plaquette trace over the 6 planes and all sites."""
    total = 0.0
    for mu in range(4):
        for nu in range(mu + 1, 4):
            total += plaquette_field(field, mu, nu).mean()
    return 0.5 * total / 6.0


def loops6(field):
    """The three perimeter-six loop averages (rectangle, parallelogram, bent)."""
    v = field.geometry.volume
    rect = 0.0
    n_rect = 0
    for mu, nu in itertools.permutations(range(4), 2):
        rect += loop_field(field, LoopPath.rectangle(mu, nu, 2, 1)).mean()
        n_rect += 1
    para = 0.0
    bent = 0.0
    n_tri = 0
    for mu, nu, rho in itertools.permutations(range(4), 3):
        p2 = LoopPath(((mu, +1), (nu, +1), (rho, +1), (mu, -1), (nu, -1), (rho, -1)))
        p3 = LoopPath(((mu, +1), (nu, +1), (mu, -1), (rho, +1), (nu, -1), (rho, -1)))
        para += loop_field(field, p2).mean()
        bent += loop_field(field, p3).mean()
        n_tri += 1
    return rect / n_rect, para / n_tri, bent / n_tri


def polyakov_field(field):
    """Traced temporal winding line at each spatial site, shape (V3,)."""
    g = field.geometry
    nx, ny, nz, nt = g.dims
    v3 = nx * ny * nz
    s3 = np.arange(v3)
    prod = field.links[s3, T]
    for t in range(1, nt):
        prod = su2.multiply(prod, field.links[s3 + v3 * t, T])
    return prod[:, 0]


def polyakov(field):
    """|spatial average| of the traced winding line, per configuration.

    The absolute value keeps the two center-symmetry sectors from
    cancelling on finite ensembles.
    """
    return float(abs(polyakov_field(field).mean()))


def wilson_rect(field, r, t):
    """r x t rectangle with the t side along T, averaged over spatial axes."""
    nx, ny, nz, nt = field.geometry.dims
    if not 1 <= r <= min(nx, ny, nz) // 2:
        raise ValueError(f"r={r} outside [1, L/2]")
    if not 1 <= t <= nt // 2:
        raise ValueError(f"t={t} outside [1, Nt/2]")
    val = 0.0
    for axis in range(3):
        steps = [(axis, +1)] * r + [(T, +1)] * t + [(axis, -1)] * r + [(T, -1)] * t
        val += loop_field(field, LoopPath(tuple(steps))).mean()
    return val / 3.0


def wilson_table(field, rmax, tmax):
    """All W(r, t) for r <= rmax, t <= tmax, sharing line products.

    Equivalent to wilson_rect on each (r, t); one pass builds the
    spatial and temporal Wilson lines cumulatively.
    """
    g = field.geometry
    nx, ny, nz, nt = g.dims
    if not 1 <= rmax <= min(nx, ny, nz) // 2:
        raise ValueError(f"rmax={rmax} outside [1, L/2]")
    if not 1 <= tmax <= nt // 2:
        raise ValueError(f"tmax={tmax} outside [1, Nt/2]")
    U = field.links
    sites = np.arange(g.volume)

    # tlines[t] = product of t temporal links starting at each site
    tlines = {}
    cur = np.arange(g.volume)
    prod = None
    for t in range(1, tmax + 1):
        leg = U[cur, T]
        prod = leg if prod is None else su2.multiply(prod, leg)
        cur = g.fwd[cur, T]
        tlines[t] = prod

    out = {(r, t): 0.0 for r in range(1, rmax + 1) for t in range(1, tmax + 1)}
    for axis in range(3):
        cur = np.arange(g.volume)
        rline = None
        shift_r = sites
        for r in range(1, rmax + 1):
            leg = U[cur, axis]
            rline = leg if rline is None else su2.multiply(rline, leg)
            cur = g.fwd[cur, axis]
            shift_r = g.fwd[shift_r, axis]
            shift_t = sites
            for t in range(1, tmax + 1):
                shift_t = g.fwd[shift_t, T]
                w = su2.multiply(rline, tlines[t][shift_r])
                w = su2.multiply(w, su2.dagger(rline[shift_t]))
                w = su2.multiply(w, su2.dagger(tlines[t]))
                out[(r, t)] += w[:, 0].mean()
    return {key: val / 3.0 for key, val in out.items()}


@dataclass
class MeasurementRecord:
    """One observable value on one configuration."""

    ensemble_id: str
    config_index: int
    observable: str
    value: float
    params: dict = dc_field(default_factory=dict)
    scheme: str = "ultrafine"
    bits_per_link: float = 256.0
    beta: float = 0.0


def measure_config(field, observables=("plaq", "loops6", "polyakov"), rmax=None, tmax=None):
    """Evaluate the requested observables on one configuration.

    Returns {name: value} with wilson entries keyed ("wilson", r, t).
    """
    out = {}
    for obs in observables:
        if obs == "plaq":
            out["plaquette"] = avg_plaquette(field)
        elif obs == "loops6":
            p1, p2, p3 = loops6(field)
            out["p6_rectangle"] = p1
            out["p6_parallelogram"] = p2
            out["p6_bent"] = p3
        elif obs == "polyakov":
            out["polyakov_abs"] = polyakov(field)
        elif obs == "wilson":
            if rmax is None or tmax is None:
                raise ValueError("wilson needs rmax and tmax")
            for (r, t), val in sorted(wilson_table(field, rmax, tmax).items()):
                out[("wilson", r, t)] = val
        else:
            raise ValueError(f"unknown observable {obs!r}")
    return out
