"""Exception types shared across the package.

Each carries a short machine-readable ``category`` used by the CLI when
reporting failures.
"""


class Su2LatError(Exception):
    category = "error"


class ZeroNormError(Su2LatError):
    category = "zero-norm"


class InvalidPlaneError(Su2LatError):
    category = "invalid-plane"


class EmptyMeshError(Su2LatError):
    category = "empty-mesh"


class UnprojectedFieldError(Su2LatError):
    category = "unprojected-field"


class FormatError(Su2LatError):
    """Bad magic bytes or unsupported format version."""

    category = "format"


class TruncatedPayloadError(Su2LatError):
    category = "truncated-payload"


class IndexRangeError(Su2LatError):
    """A stored codebook index is >= the codebook size."""

    category = "index-range"


class MeshDigestMismatchError(Su2LatError):
    category = "mesh-digest-mismatch"


class GeometryMismatchError(Su2LatError):
    category = "geometry-mismatch"


class ConfigSetMismatchError(Su2LatError):
    """Paired analyses require identical configuration sets."""

    category = "config-set-mismatch"


class FitWindowError(Su2LatError):
    """Too few usable points survive window pruning."""

    category = "fit-window"


class OutputTargetError(Su2LatError):
    category = "output-target"
