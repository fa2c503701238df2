"""4D periodic hypercubic lattice and the gauge-link field.

Sites are indexed lexicographically with x fastest, then y, z, t.  Links
are stored site-major with direction order X, Y, Z, T; this order is
frozen because the on-disk format reuses it byte for byte.
"""

import numpy as np

from . import su2
from .errors import InvalidPlaneError

X, Y, Z, T = 0, 1, 2, 3
NDIR = 4

__all__ = [
    "X", "Y", "Z", "T", "NDIR",
    "LatticeGeometry",
    "GaugeField",
    "plaquette_re_trace",
    "plaquette_field",
    "sum_plaquette_re_trace",
    "staple_sum",
    "gauge_transform",
]


class LatticeGeometry:
    """Periodic (Nx, Ny, Nz, Nt) geometry with cached neighbor tables."""

    def __init__(self, dims):
        dims = tuple(int(d) for d in dims)
        if len(dims) != 4 or any(d < 2 for d in dims):
            raise ValueError(f"need four extents >= 2, got {dims}")
        self.dims = dims
        self.volume = dims[0] * dims[1] * dims[2] * dims[3]
        self.n_links = 4 * self.volume
        self._fwd = None
        self._bwd = None

    def __eq__(self, other):
        return isinstance(other, LatticeGeometry) and self.dims == other.dims

    def __repr__(self):
        return f"LatticeGeometry({self.dims})"

    def site_index(self, coords):
        """Map (..., 4) coordinates to site ids, wrapping periodically."""
        coords = np.asarray(coords)
        x = np.mod(coords[..., 0], self.dims[0])
        y = np.mod(coords[..., 1], self.dims[1])
        z = np.mod(coords[..., 2], self.dims[2])
        t = np.mod(coords[..., 3], self.dims[3])
        return x + self.dims[0] * (y + self.dims[1] * (z + self.dims[2] * t))

    def site_coords(self, site):
        """Inverse of site_index for in-range ids."""
        site = np.asarray(site)
        nx, ny, nz, _ = self.dims
        x = site % nx
        y = (site // nx) % ny
        z = (site // (nx * ny)) % nz
        t = site // (nx * ny * nz)
        return np.stack([x, y, z, t], axis=-1)

    def _build_tables(self):
        sites = np.arange(self.volume)
        coords = self.site_coords(sites)
        fwd = np.empty((self.volume, 4), dtype=np.int64)
        bwd = np.empty((self.volume, 4), dtype=np.int64)
        for mu in range(4):
            step = np.zeros(4, dtype=np.int64)
            step[mu] = 1
            fwd[:, mu] = self.site_index(coords + step)
            bwd[:, mu] = self.site_index(coords - step)
        self._fwd = fwd
        self._bwd = bwd

    @property
    def fwd(self):
        if self._fwd is None:
            self._build_tables()
        return self._fwd

    @property
    def bwd(self):
        if self._bwd is None:
            self._build_tables()
        return self._bwd

    def neighbor(self, site, mu, sign=+1):
        return self.fwd[site, mu] if sign > 0 else self.bwd[site, mu]


class GaugeField:
    """Gauge links on a lattice: array of shape (V, 4, 4).

    ``on_manifold`` is cleared by fixed-point truncation, whose output
    quaternions sit slightly off the unit sphere.
    """

    def __init__(self, geometry, links, on_manifold=True):
        links = np.asarray(links, dtype=np.float64)
        if links.shape != (geometry.volume, 4, 4):
            raise ValueError(f"links shape {links.shape} does not match {geometry}")
        self.geometry = geometry
        self.links = links
        self.on_manifold = on_manifold

    @classmethod
    def cold(cls, geometry):
        """All links set to the identity."""
        links = np.zeros((geometry.volume, 4, 4))
        links[:, :, 0] = 1.0
        return cls(geometry, links)

    @classmethod
    def hot(cls, geometry, rng):
        """All links Haar random."""
        links = su2.haar_sample(rng, size=(geometry.volume, 4))
        return cls(geometry, links)

    def copy(self):
        return GaugeField(self.geometry, self.links.copy(), self.on_manifold)

    def link(self, site, mu):
        return self.links[site, mu]

    def reunitarize(self):
        """Rescale every link onto the unit sphere (after float drift)."""
        self.links /= su2.norm(self.links)[..., np.newaxis]
        self.on_manifold = True


def plaquette_field(field, mu, nu):
    """Re Tr of the (mu, nu) plaquette at every site, shape (V,)."""
    if mu == nu:
        raise InvalidPlaneError(f"plaquette plane needs two directions, got {mu},{nu}")
    U = field.links
    fwd = field.geometry.fwd
    p = su2.multiply(U[:, mu], U[fwd[:, mu], nu])
    p = su2.multiply(p, su2.dagger(U[fwd[:, nu], mu]))
    p = su2.multiply(p, su2.dagger(U[:, nu]))
    return su2.re_trace(p)


def plaquette_re_trace(field, site, mu, nu):
    """Re Tr[U_mu(x) U_nu(x+mu) U_mu(x+nu)^+ U_nu(x)^+] at one site."""
    if mu == nu:
        raise InvalidPlaneError(f"plaquette plane needs two directions, got {mu},{nu}")
    U = field.links
    g = field.geometry
    p = su2.multiply(U[site, mu], U[g.fwd[site, mu], nu])
    p = su2.multiply(p, su2.dagger(U[g.fwd[site, nu], mu]))
    p = su2.multiply(p, su2.dagger(U[site, nu]))
    return float(su2.re_trace(p))


def sum_plaquette_re_trace(field):
    """Sum of Re Tr over all six planes and all sites (action bookkeeping)."""
    total = 0.0
    for mu in range(4):
        for nu in range(mu + 1, 4):
            total += plaquette_field(field, mu, nu).sum()
    return total


def staple_sum(field, site, mu):
    """Sum of the six staples through link (site, mu), as a 4-vector.

    Satisfies Re Tr(U_mu(site) . staple_sum) == sum of the six plaquette
    traces containing that link.
    """
    U = field.links
    g = field.geometry
    sp = g.fwd[site, mu]
    total = np.zeros(4)
    for nu in range(4):
        if nu == mu:
            continue
        up = su2.multiply(U[sp, nu], su2.dagger(U[g.fwd[site, nu], mu]))
        up = su2.multiply(up, su2.dagger(U[site, nu]))
        j = g.bwd[site, nu]
        dn = su2.multiply(su2.dagger(U[g.fwd[j, mu], nu]), su2.dagger(U[j, mu]))
        dn = su2.multiply(dn, U[j, nu])
        total += up + dn
    return total


def gauge_transform(field, omegas):
    """Apply U_mu(x) -> W(x) U_mu(x) W(x+mu)^+ with one W per site."""
    omegas = np.asarray(omegas, dtype=np.float64)
    if omegas.shape != (field.geometry.volume, 4):
        raise ValueError("need one rotation per site")
    fwd = field.geometry.fwd
    new = np.empty_like(field.links)
    for mu in range(4):
        tmp = su2.multiply(omegas, field.links[:, mu])
        new[:, mu] = su2.multiply(tmp, su2.dagger(omegas[fwd[:, mu]]))
    return GaugeField(field.geometry, new, field.on_manifold)
