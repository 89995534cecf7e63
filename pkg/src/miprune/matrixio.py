"""Embedding matrix container and bit-exact NPY v1.0 file I/O.

All arithmetic downstream runs in float64; float32 files are widened
losslessly on load. Only the plain v1.0 container is accepted: C-order,
2-D, little-endian float32/float64. That keeps the interchange format
bit-exact and trivially producible from any tensor stack.
"""

from __future__ import annotations

import ast
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    DegenerateEmbeddingError,
    FormatError,
    UnsupportedLayoutError,
)

MAGIC = b"\x93NUMPY"
ZERO_ROW_NORM = 1e-12

Kind = str  # one of "visual", "textual", "attention"
_KINDS = ("visual", "textual", "attention")


def _check_payload(data: np.ndarray, kind: str) -> None:
    if kind not in _KINDS:
        raise DataError(f"unknown matrix kind {kind!r}, expected one of {_KINDS}")
    if data.ndim != 2:
        raise DataError(f"expected a 2-D matrix, got {data.ndim}-D")
    rows, cols = data.shape
    if rows < 1 or cols < 1:
        raise DataError(f"matrix must be at least 1x1, got shape {data.shape}")
    bad = np.argwhere(~np.isfinite(data))
    if bad.size:
        r, c = bad[0]
        raise DataError(f"non-finite entry at row {r}, col {c}")
    if kind == "attention":
        if rows != cols:
            raise DataError(f"attention matrix must be square, got shape {data.shape}")
        if np.any(data < 0):
            r, c = np.argwhere(data < 0)[0]
            raise DataError(f"negative attention entry at row {r}, col {c}")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Dense token matrix: one row per token, float64, finite everywhere."""

    data: np.ndarray
    kind: Kind = "visual"

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        _check_payload(arr, self.kind)
        object.__setattr__(self, "data", arr)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class NormalizedMatrix(EmbeddingMatrix):
    """Embedding matrix whose rows all sit on the unit hypersphere."""

    unit_norm: bool = field(default=True)

    def __post_init__(self):
        super().__post_init__()
        norms = np.linalg.norm(self.data, axis=1)
        off = np.abs(norms - 1.0)
        if np.any(off > 1e-6):
            i = int(np.argmax(off))
            raise DataError(
                f"row {i} has L2 norm {norms[i]:.9f}, not unit within 1e-6"
            )


def row_normalize(matrix: EmbeddingMatrix) -> NormalizedMatrix:
    """Project every row onto the unit hypersphere.

    Raises DegenerateEmbeddingError if any row norm falls below 1e-12,
    naming the first offending row.
    """
    norms = np.linalg.norm(matrix.data, axis=1)
    tiny = np.flatnonzero(norms < ZERO_ROW_NORM)
    if tiny.size:
        raise DegenerateEmbeddingError(
            f"row {tiny[0]} has norm {norms[tiny[0]]:.3e}; cannot normalize"
        )
    return NormalizedMatrix(matrix.data / norms[:, None], kind=matrix.kind)


def _parse_header(header: bytes, path) -> tuple[str, tuple[int, int]]:
    try:
        meta = ast.literal_eval(header.decode("latin1"))
    except (ValueError, SyntaxError) as exc:
        raise FormatError(f"{path}: cannot parse NPY header dict") from exc
    if not isinstance(meta, dict) or set(meta) != {"descr", "fortran_order", "shape"}:
        raise FormatError(f"{path}: NPY header must have exactly descr/fortran_order/shape")

    descr = meta["descr"]
    if meta["fortran_order"] is not False:
        raise UnsupportedLayoutError(f"{path}: fortran_order arrays are not supported")
    shape = meta["shape"]
    if not (isinstance(shape, tuple) and all(isinstance(n, int) for n in shape)):
        raise FormatError(f"{path}: malformed shape {shape!r}")
    if len(shape) != 2:
        raise UnsupportedLayoutError(
            f"{path}: expected a 2-D array, header declares {len(shape)} dims"
        )
    if descr not in ("<f4", "<f8"):
        raise UnsupportedLayoutError(
            f"{path}: dtype {descr!r} not supported (need '<f4' or '<f8')"
        )
    return descr, shape


def load_array(path, kind: Kind = "visual") -> EmbeddingMatrix:
    """Read a 2-D float matrix from an NPY v1.0 file, bit-exactly.

    float32 payloads are widened to float64 (lossless). The file kind is
    not stored in the container; the caller assigns it.
    """
    with open(path, "rb") as fh:
        raw = fh.read()

    if raw[:6] != MAGIC:
        raise FormatError(f"{path}: bad magic bytes {raw[:6]!r}")
    if len(raw) < 10:
        raise FormatError(f"{path}: truncated container")
    major, minor = raw[6], raw[7]
    if (major, minor) != (1, 0):
        raise FormatError(f"{path}: NPY version {major}.{minor} not supported, need 1.0")
    (hlen,) = struct.unpack("<H", raw[8:10])
    header_end = 10 + hlen
    if len(raw) < header_end:
        raise FormatError(f"{path}: header length {hlen} overruns the file")
    descr, shape = _parse_header(raw[10:header_end], path)

    itemsize = 4 if descr == "<f4" else 8
    expected = shape[0] * shape[1] * itemsize
    payload = raw[header_end:]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload is {len(payload)} bytes, shape {shape} needs {expected}"
        )
    arr = np.frombuffer(payload, dtype=descr).reshape(shape)
    return EmbeddingMatrix(arr.astype(np.float64), kind=kind)


def save_array(matrix: EmbeddingMatrix, path) -> None:
    """Write the matrix as NPY v1.0, '<f8', C-order, header padded to 64 bytes."""
    arr = matrix.data
    header = (
        "{'descr': '<f8', 'fortran_order': False, "
        f"'shape': ({arr.shape[0]}, {arr.shape[1]}), }}"
    )
    # magic(6) + version(2) + hlen(2) + header must align to 64, newline last
    pad = 64 - ((10 + len(header) + 1) % 64)
    if pad == 64:
        pad = 0
    header_bytes = (header + " " * pad + "\n").encode("latin1")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(bytes((1, 0)))
        fh.write(struct.pack("<H", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(arr.tobytes(order="C"))
