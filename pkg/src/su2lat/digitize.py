"""Digitization codebooks and gauge-field projection.

Three families of coarse link representations:

* fixed-point truncation of the quaternion components (off-manifold),
* the binary tetrahedral / octahedral / icosahedral subgroups,
* geodesic "edgewise" meshes: integer points of the L1 sphere of radius
  k in Z^4, pushed out to the unit 3-sphere.  Level k holds
  v = (8/3) k (k^2 + 2) points; k = 1 is the 4D cross-polytope.

Projection is either nearest-neighbor in the Euclidean (L2) metric or
action-preserving rounding (APR), which picks, link by link in sweep
order, the codebook element that best preserves a plaquette value of
the original field.
"""

import hashlib
import itertools
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels
from .errors import EmptyMeshError
from .lattice import GaugeField

__all__ = [
    "FixedPointSpec",
    "Mesh",
    "fixed_point_truncate",
    "project_fixed_point",
    "gen_subgroup",
    "gen_edgewise_mesh",
    "project_l2",
    "project_apr",
    "bits_per_link",
]

_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

# brute-force NN below this codebook size, spatial index above
_KDTREE_THRESHOLD = 1000


@dataclass(frozen=True)
class FixedPointSpec:
    """p bits per real component, sign bit included; 3p bits per link."""

    p: int

    def __post_init__(self):
        if not 2 <= self.p <= 62:
            raise ValueError(f"fixed-point precision must be in [2, 62], got {self.p}")

    @property
    def bits_per_link(self):
        return 3 * self.p

    @property
    def scheme_id(self):
        return f"fp{self.p}"


def fixed_point_truncate(q, spec):
    """Truncate quaternion components onto the p-bit fixed-point grid.

    a, b, c are truncated toward zero onto multiples of 2^-(p-1); the
    largest representable magnitude is 1 - 2^-(p-1).  The last component
    is recomputed at full precision from the truncated a, b, c, keeps
    the sign of the input d (zero stays zero), and is then truncated the
    same way.  The result generally sits slightly off the unit sphere,
    by at most 8 * 2^-(p-1) in the squared norm.
    """
    if isinstance(spec, int):
        spec = FixedPointSpec(spec)
    scale = float(2 ** (spec.p - 1))

    def fp(x):
        code = np.minimum(np.floor(np.abs(x) * scale), scale - 1.0)
        return np.sign(x) * code / scale

    q = np.asarray(q, dtype=np.float64)
    out = np.empty_like(q)
    out[..., 0] = fp(q[..., 0])
    out[..., 1] = fp(q[..., 1])
    out[..., 2] = fp(q[..., 2])
    rest = 1.0 - out[..., 0] ** 2 - out[..., 1] ** 2 - out[..., 2] ** 2
    out[..., 3] = np.sign(q[..., 3]) * fp(np.sqrt(np.maximum(rest, 0.0)))
    return out


def project_fixed_point(field, spec):
    """Truncate every link; the output field is flagged off-manifold."""
    links = fixed_point_truncate(field.links, spec)
    return GaugeField(field.geometry, links, on_manifold=False)


@dataclass(eq=False)
class Mesh:
    """Finite codebook of unit quaternions with a nearest-neighbor index."""

    elements: np.ndarray
    kind: str  # "subgroup" or "edgewise"
    label: str  # "2T", "2O", "2I", or "edgewise-<k>"
    level: int = 0
    _tree: object = dc_field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.elements = np.ascontiguousarray(self.elements, dtype=np.float64)
        if self.elements.ndim != 2 or self.elements.shape[1] != 4:
            raise ValueError("mesh elements must have shape (v, 4)")
        if len(self.elements) == 0:
            raise EmptyMeshError("mesh has no elements")

    @property
    def size(self):
        return len(self.elements)

    @property
    def bits_per_link(self):
        return math.log2(self.size)

    @property
    def index_bits(self):
        """Whole bits needed to index the codebook."""
        return max(1, math.ceil(math.log2(self.size)))

    @property
    def scheme_id(self):
        return self.label

    @property
    def digest(self):
        """Content hash tying stored index payloads to this codebook."""
        h = hashlib.sha256()
        h.update(f"{self.kind}:{self.label}:{self.size}:".encode())
        h.update(np.ascontiguousarray(self.elements, dtype="<f8").tobytes())
        return h.digest()

    def nearest(self, points):
        """Indices of the closest elements; ties go to the lowest index."""
        points = np.asarray(points, dtype=np.float64)
        flat = points.reshape(-1, 4)
        if self.size >= _KDTREE_THRESHOLD:
            if self._tree is None:
                from scipy.spatial import cKDTree

                self._tree = cKDTree(self.elements)
            idx = self._tree.query(flat)[1]
        else:
            # minimizing |g - m|^2 is maximizing g . m at fixed |m| = 1
            idx = np.empty(len(flat), dtype=np.int64)
            step = 8192
            for lo in range(0, len(flat), step):
                hi = min(lo + step, len(flat))
                idx[lo:hi] = np.argmax(flat[lo:hi] @ self.elements.T, axis=1)
        return idx.reshape(points.shape[:-1])


def _signed_units():
    out = np.zeros((8, 4))
    for i in range(4):
        out[2 * i, i] = 1.0
        out[2 * i + 1, i] = -1.0
    return out


def _half_integer_cells():
    signs = np.array(list(itertools.product([0.5, -0.5], repeat=4)))
    return signs


def _canonical_order(elements):
    keys = tuple(elements[:, i] for i in (3, 2, 1, 0))
    return elements[np.lexsort(keys)]


def gen_subgroup(name):
    """Binary tetrahedral (24), octahedral (48) or icosahedral (120) group."""
    if name == "2T":
        els = np.vstack([_signed_units(), _half_integer_cells()])
    elif name == "2O":
        extra = []
        for i, j in itertools.combinations(range(4), 2):
            for si, sj in itertools.product([1.0, -1.0], repeat=2):
                v = np.zeros(4)
                v[i] = si / math.sqrt(2.0)
                v[j] = sj / math.sqrt(2.0)
                extra.append(v)
        els = np.vstack([gen_subgroup("2T").elements, extra])
    elif name == "2I":
        base = np.array([_GOLDEN, 1.0, 1.0 / _GOLDEN, 0.0]) / 2.0
        extra = []
        for perm in itertools.permutations(range(4)):
            if _perm_parity(perm) != 0:
                continue
            arranged = np.empty(4)
            for pos, src in enumerate(perm):
                arranged[pos] = base[src]
            nz = np.nonzero(arranged)[0]
            for signs in itertools.product([1.0, -1.0], repeat=len(nz)):
                v = arranged.copy()
                v[nz] *= signs
                extra.append(v)
        els = np.vstack([gen_subgroup("2T").elements, extra])
    else:
        raise ValueError(f"unknown subgroup {name!r} (expected 2T, 2O or 2I)")
    els = _canonical_order(els)
    expected = {"2T": 24, "2O": 48, "2I": 120}[name]
    assert len(els) == expected, (name, len(els))
    return Mesh(elements=els, kind="subgroup", label=name)


def _perm_parity(perm):
    inv = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                inv += 1
    return inv % 2


def edgewise_size(k):
    """Number of integer points on the L1 sphere of radius k in Z^4."""
    return 8 * k * (k * k + 2) // 3


def gen_edgewise_mesh(k):
    """Geodesic mesh at subdivision level k >= 1."""
    k = int(k)
    if k < 1:
        raise ValueError("edgewise level must be >= 1")
    pts = []
    for x1 in range(-k, k + 1):
        r1 = k - abs(x1)
        for x2 in range(-r1, r1 + 1):
            r2 = r1 - abs(x2)
            for x3 in range(-r2, r2 + 1):
                r3 = r2 - abs(x3)
                if r3 == 0:
                    pts.append((x1, x2, x3, 0))
                else:
                    pts.append((x1, x2, x3, r3))
                    pts.append((x1, x2, x3, -r3))
    arr = np.array(sorted(set(pts)), dtype=np.float64)
    arr /= np.linalg.norm(arr, axis=1)[:, np.newaxis]
    arr = _canonical_order(arr)
    assert len(arr) == edgewise_size(k), (k, len(arr))
    return Mesh(elements=arr, kind="edgewise", label=f"edgewise-{k}", level=k)


def project_l2(field, mesh):
    """Replace every link by its nearest codebook element."""
    idx = mesh.nearest(field.links)
    links = mesh.elements[idx]
    return GaugeField(field.geometry, links, on_manifold=True)


def project_apr(field, mesh, objective="all-staples"):
    """Action-preserving rounding onto a codebook.

    Links are replaced in sweep order (directions X, Y, Z, T, then sites),
    each by the element that minimizes the change of local plaquette
    values relative to the untouched input field; already-projected
    links feed into later choices.  Ties prefer the element nearest the
    original link, then the lowest index; a codebook-valued field is an
    exact fixed point.

    ``objective="all-staples"`` (default) scores the summed squared
    deviation of all six plaquettes containing the link.  ``"single"``
    scores only the plaquette in the plane of the link direction and its
    cyclic successor; matching one trace leaves the element free in the
    remaining group directions, which in practice randomizes every other
    loop, so it is kept for comparison rather than production use.
    """
    if mesh.size == 0:
        raise EmptyMeshError("mesh has no elements")
    g = field.geometry
    orig = np.ascontiguousarray(field.links)
    new = orig.copy()
    if objective == "single":
        targets = np.empty((g.volume, 4))
        _kernels.apr_targets_single(orig, g.fwd, targets)
        _kernels.apr_sweep_single(new, orig, targets, mesh.elements, g.fwd, g.bwd)
    elif objective == "all-staples":
        tgt_up = np.zeros((g.volume, 4, 4))
        tgt_dn = np.zeros((g.volume, 4, 4))
        _kernels.apr_targets_all(orig, g.fwd, g.bwd, tgt_up, tgt_dn)
        _kernels.apr_sweep_all(new, orig, tgt_up, tgt_dn, mesh.elements, g.fwd, g.bwd)
    else:
        raise ValueError(f"unknown APR objective {objective!r}")
    return GaugeField(g, new, on_manifold=True)


def bits_per_link(scheme):
    """Bits needed per link: 3p for fixed point, log2(v) (unrounded) for meshes."""
    if isinstance(scheme, FixedPointSpec):
        return float(scheme.bits_per_link)
    if isinstance(scheme, Mesh):
        return scheme.bits_per_link
    raise TypeError(f"not a digitization scheme: {scheme!r}")
