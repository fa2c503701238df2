"""On-disk formats: gauge configurations, mesh codebooks, measurement
tables and run manifests.

Configuration files are little-endian: an 84-byte header (magic
"SU2LAT", format version, dims, beta, trajectory index, seed, start
flag, payload kind, fixed-point precision, mesh digest) followed by one
of three payloads:

* quaternion-f64: 4V links x 4 doubles, storage order as in `lattice`;
* indexed-mesh: codebook indices bit-packed at ceil(log2 v) bits per
  link, tied to the codebook by its content digest;
* fixed-point: four p-bit offset-binary codes per link.

Round trips are bit-exact; all integrity failures raise distinct errors.
"""

import csv
import hashlib
import json
import struct

import numpy as np

from .digitize import Mesh
from .errors import (
    FormatError,
    IndexRangeError,
    MeshDigestMismatchError,
    TruncatedPayloadError,
    UnprojectedFieldError,
)
from .lattice import GaugeField, LatticeGeometry
from .observables import MeasurementRecord

MAGIC = b"SU2LAT"
CONFIG_VERSION = 1
MESH_VERSION = 1
_HEADER = struct.Struct("<6sH4IdQQBBH32s")

PAYLOAD_QUATERNION = 0
PAYLOAD_INDEXED = 1
PAYLOAD_FIXED = 2

_KIND_NAMES = {"quaternion": PAYLOAD_QUATERNION, "indexed": PAYLOAD_INDEXED,
               "fixedpoint": PAYLOAD_FIXED}
_START_FLAGS = {"cold": 0, "hot": 1}

__all__ = [
    "ConfigHeader",
    "write_config",
    "read_config",
    "payload_nbytes",
    "encode_indexed",
    "decode_indexed",
    "save_mesh",
    "load_mesh",
    "write_measurements",
    "read_measurements",
    "write_manifest",
    "file_digest",
]


class ConfigHeader:
    def __init__(self, dims, beta, trajectory, seed, start, kind, p=0, mesh_digest=b"\0" * 32):
        self.dims = tuple(dims)
        self.beta = beta
        self.trajectory = trajectory
        self.seed = seed
        self.start = start
        self.kind = kind
        self.p = p
        self.mesh_digest = mesh_digest

    def pack(self):
        return _HEADER.pack(
            MAGIC, CONFIG_VERSION, *self.dims, self.beta, self.trajectory,
            self.seed, _START_FLAGS[self.start], self.kind, self.p, self.mesh_digest,
        )

    @classmethod
    def unpack(cls, raw):
        if len(raw) < _HEADER.size:
            raise TruncatedPayloadError("file shorter than the header")
        (magic, version, nx, ny, nz, nt, beta, traj, seed, start, kind, p,
         digest) = _HEADER.unpack(raw[: _HEADER.size])
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}")
        if version != CONFIG_VERSION:
            raise FormatError(f"unsupported config version {version}")
        start_name = {v: k for k, v in _START_FLAGS.items()}.get(start)
        if start_name is None:
            raise FormatError(f"unknown start flag {start}")
        if kind not in (PAYLOAD_QUATERNION, PAYLOAD_INDEXED, PAYLOAD_FIXED):
            raise FormatError(f"unknown payload kind {kind}")
        return cls((nx, ny, nz, nt), beta, traj, seed, start_name, kind, p, digest)


def pack_uint_bits(values, nbits):
    """Big-endian-within-value bit packing; the tail byte is zero padded."""
    values = np.asarray(values, dtype=np.uint64)
    shifts = np.arange(nbits - 1, -1, -1, dtype=np.uint64)
    bits = ((values[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
    return np.packbits(bits.ravel()).tobytes()


def unpack_uint_bits(data, nbits, count):
    need = (count * nbits + 7) // 8
    if len(data) < need:
        raise TruncatedPayloadError(f"payload holds {len(data)} bytes, need {need}")
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=count * nbits)
    bits = bits.reshape(count, nbits).astype(np.uint64)
    weights = np.uint64(1) << np.arange(nbits - 1, -1, -1, dtype=np.uint64)
    return (bits * weights).sum(axis=1)


def payload_nbytes(kind, volume, index_bits=0, p=0):
    if kind == PAYLOAD_QUATERNION:
        return volume * 4 * 4 * 8
    if kind == PAYLOAD_INDEXED:
        return (volume * 4 * index_bits + 7) // 8
    if kind == PAYLOAD_FIXED:
        return (volume * 4 * 4 * p + 7) // 8
    raise FormatError(f"unknown payload kind {kind}")


def encode_indexed(field, mesh):
    """Bit-packed codebook indices of a projected field.

    Every link must already be a codebook element; there is no nearest-
    element fallback here, projection has to be explicit.
    """
    flat = field.links.reshape(-1, 4)
    idx = mesh.nearest(flat)
    delta = flat - mesh.elements[idx]
    worst = float(np.max(np.sum(delta * delta, axis=1)))
    if worst > 1e-18:
        raise UnprojectedFieldError(
            f"field is not projected onto this mesh (max distance^2 {worst:.3e})"
        )
    return pack_uint_bits(idx, mesh.index_bits)


def decode_indexed(payload, mesh, geometry):
    n = geometry.n_links
    idx = unpack_uint_bits(payload, mesh.index_bits, n)
    if np.any(idx >= mesh.size):
        raise IndexRangeError(f"index >= codebook size {mesh.size}")
    links = mesh.elements[idx.astype(np.int64)].reshape(geometry.volume, 4, 4)
    return GaugeField(geometry, links, on_manifold=True)


def _encode_fixed(field, p):
    iscale = 1 << (p - 1)
    codes = field.links.reshape(-1) * float(iscale)
    rounded = np.rint(codes)
    if np.max(np.abs(codes - rounded)) > 0 or np.max(np.abs(rounded)) > iscale - 1:
        raise UnprojectedFieldError("links are not on the fixed-point grid")
    # offset binary; integer add to stay exact at large p
    return pack_uint_bits(rounded.astype(np.int64) + iscale, p)


def _decode_fixed(payload, p, geometry):
    iscale = 1 << (p - 1)
    n = geometry.n_links * 4
    codes = unpack_uint_bits(payload, p, n).astype(np.int64) - iscale
    links = (codes.astype(np.float64) / float(iscale)).reshape(geometry.volume, 4, 4)
    return GaugeField(geometry, links, on_manifold=False)


def write_config(path, field, *, beta, trajectory, seed, start,
                 payload="quaternion", mesh=None, fp_spec=None):
    kind = _KIND_NAMES[payload]
    if kind == PAYLOAD_INDEXED:
        if mesh is None:
            raise ValueError("indexed payload needs a mesh")
        body = encode_indexed(field, mesh)
        header = ConfigHeader(field.geometry.dims, beta, trajectory, seed, start,
                              kind, mesh_digest=mesh.digest)
    elif kind == PAYLOAD_FIXED:
        if fp_spec is None:
            raise ValueError("fixed-point payload needs a FixedPointSpec")
        body = _encode_fixed(field, fp_spec.p)
        header = ConfigHeader(field.geometry.dims, beta, trajectory, seed, start,
                              kind, p=fp_spec.p)
    else:
        body = np.ascontiguousarray(field.links, dtype="<f8").tobytes()
        header = ConfigHeader(field.geometry.dims, beta, trajectory, seed, start, kind)
    with open(path, "wb") as fh:
        fh.write(header.pack())
        fh.write(body)


def read_config(path, mesh=None):
    """Read a configuration; returns (GaugeField, ConfigHeader).

    Indexed payloads need the matching mesh (checked by digest).
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    header = ConfigHeader.unpack(raw)
    geometry = LatticeGeometry(header.dims)
    body = raw[_HEADER.size:]
    expect = payload_nbytes(
        header.kind, geometry.volume,
        index_bits=mesh.index_bits if (mesh is not None and header.kind == PAYLOAD_INDEXED) else 0,
        p=header.p,
    )
    if header.kind == PAYLOAD_QUATERNION:
        if len(body) != expect:
            raise TruncatedPayloadError(f"payload is {len(body)} bytes, expected {expect}")
        links = np.frombuffer(body, dtype="<f8").reshape(geometry.volume, 4, 4).copy()
        return GaugeField(geometry, links), header
    if header.kind == PAYLOAD_FIXED:
        expect = payload_nbytes(PAYLOAD_FIXED, geometry.volume, p=header.p)
        if len(body) != expect:
            raise TruncatedPayloadError(f"payload is {len(body)} bytes, expected {expect}")
        return _decode_fixed(body, header.p, geometry), header
    if mesh is None:
        raise MeshDigestMismatchError(
            f"indexed payload needs its mesh (digest {header.mesh_digest.hex()})"
        )
    if mesh.digest != header.mesh_digest:
        raise MeshDigestMismatchError("mesh digest does not match the payload")
    if len(body) != expect:
        raise TruncatedPayloadError(f"payload is {len(body)} bytes, expected {expect}")
    return decode_indexed(body, mesh, geometry), header


def save_mesh(mesh, path):
    doc = {
        "format": "su2lat-mesh",
        "version": MESH_VERSION,
        "kind": mesh.kind,
        "label": mesh.label,
        "level": mesh.level,
        "v": mesh.size,
        "digest": mesh.digest.hex(),
        "elements": [[float(x) for x in row] for row in mesh.elements],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_mesh(path):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "su2lat-mesh":
        raise FormatError(f"{path} is not a mesh file")
    if doc.get("version") != MESH_VERSION:
        raise FormatError(f"unsupported mesh version {doc.get('version')}")
    mesh = Mesh(
        elements=np.array(doc["elements"], dtype=np.float64),
        kind=doc["kind"],
        label=doc["label"],
        level=doc.get("level") or 0,
    )
    if mesh.size != doc["v"]:
        raise FormatError(f"{path}: element count {mesh.size} != declared {doc['v']}")
    if mesh.digest.hex() != doc["digest"]:
        raise MeshDigestMismatchError(f"{path}: stored digest does not match contents")
    return mesh


_CSV_FIELDS = ["ensemble_id", "scheme", "bits_per_link", "beta",
               "config_index", "observable", "r", "t", "value"]


def write_measurements(path, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_CSV_FIELDS)
        for r in records:
            w.writerow([
                r.ensemble_id, r.scheme, repr(float(r.bits_per_link)), repr(float(r.beta)),
                r.config_index, r.observable,
                r.params.get("r", ""), r.params.get("t", ""), repr(float(r.value)),
            ])


def read_measurements(path):
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != _CSV_FIELDS:
            raise FormatError(f"{path}: unexpected measurement columns")
        for row in reader:
            params = {}
            if row["r"]:
                params["r"] = int(row["r"])
            if row["t"]:
                params["t"] = int(row["t"])
            records.append(MeasurementRecord(
                ensemble_id=row["ensemble_id"],
                config_index=int(row["config_index"]),
                observable=row["observable"],
                value=float(row["value"]),
                params=params,
                scheme=row["scheme"],
                bits_per_link=float(row["bits_per_link"]),
                beta=float(row["beta"]),
            ))
    return records


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
