"""SU(2) group algebra in the unit-quaternion representation.

A group element is the real 4-vector q = (a, b, c, d) with
a^2 + b^2 + c^2 + d^2 = 1, standing for the matrix

    [[a + ib, -c + id],
     [ c + id,  a - ib]].

All functions broadcast over arrays whose last axis has length 4, so a
gauge field of shape (V, 4, 4) multiplies as naturally as a single
element.  ``multiply`` composes in matrix-product order; under this
embedding the imaginary units are left-handed,
multiply((0,1,0,0), (0,0,1,0)) == (0,0,0,-1).

Unnormalized 4-vectors (staple sums and other element sums) live in the
same layout; ``normalize`` splits one into a unit element and its norm.
"""

import numpy as np

from . import _kernels
from .errors import ZeroNormError

__all__ = [
    "identity",
    "multiply",
    "dagger",
    "re_trace",
    "norm",
    "distance_sq",
    "normalize",
    "haar_sample",
]

_CONJ = np.array([1.0, -1.0, -1.0, -1.0])


def identity(shape=()):
    """Identity element(s): (1, 0, 0, 0) broadcast to shape + (4,)."""
    out = np.zeros(tuple(np.atleast_1d(shape)) + (4,) if shape != () else (4,))
    out[..., 0] = 1.0
    return out


def multiply(g, h):
    """Quaternion product equal to the 2x2 matrix product of g and h."""
    g = np.asarray(g, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    a1, b1, c1, d1 = g[..., 0], g[..., 1], g[..., 2], g[..., 3]
    a2, b2, c2, d2 = h[..., 0], h[..., 1], h[..., 2], h[..., 3]
    out = np.empty(np.broadcast(a1, a2).shape + (4,))
    out[..., 0] = a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2
    out[..., 1] = a1 * b2 + b1 * a2 - c1 * d2 + d1 * c2
    out[..., 2] = a1 * c2 + b1 * d2 + c1 * a2 - d1 * b2
    out[..., 3] = a1 * d2 - b1 * c2 + c1 * b2 + d1 * a2
    return out


def dagger(g):
    """Hermitian conjugate: (a, -b, -c, -d)."""
    return np.asarray(g, dtype=np.float64) * _CONJ


def re_trace(g):
    """Re Tr of the matrix form, i.e. 2a."""
    return 2.0 * np.asarray(g)[..., 0]


def norm(q):
    return np.sqrt(np.sum(np.square(q), axis=-1))


def distance_sq(A, B):
    """Squared Euclidean distance on the 3-sphere embedding.

    Bi-invariant: left or right multiplication by a common group element
    leaves it unchanged.
    """
    d = np.asarray(A, dtype=np.float64) - np.asarray(B, dtype=np.float64)
    return np.sum(d * d, axis=-1)


def normalize(q):
    """Split an unnormalized 4-vector into (unit element, norm).

    Raises ZeroNormError when any norm vanishes.
    """
    q = np.asarray(q, dtype=np.float64)
    k = norm(q)
    if np.any(k == 0.0):
        raise ZeroNormError("cannot normalize a zero quaternion sum")
    return q / k[..., np.newaxis], k


def haar_sample(rng, size=None):
    """Haar-uniform element(s): four normals projected to the unit sphere.

    Consumes the stream of ``rng`` sequentially, so a fixed seed fixes
    the full sample sequence.
    """
    n = 1 if size is None else int(np.prod(size))
    out = np.empty((n, 4), dtype=np.float64)
    _kernels.fill_haar(rng.state_array, out)
    if size is None:
        return out[0]
    return out.reshape(tuple(np.atleast_1d(size)) + (4,))
