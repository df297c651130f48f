"""Minimal reader/writer for version 1.0 NPY streams holding 2-D numeric arrays."""

from __future__ import annotations

import ast
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, TruncationError, UnsupportedError

MAGIC = b"\x93NUMPY"
SUPPORTED_DESCR = {"<f8": np.dtype("<f8"), "<i8": np.dtype("<i8")}
_PREAMBLE = len(MAGIC) + 2 + 2  # magic, version, header length


def parse_npy(data: bytes) -> np.ndarray:
    """Decode an NPY v1.0 byte stream into a C-ordered 2-D array.

    Only little-endian float64 and int64 payloads in C order are accepted.
    """
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise FormatError("missing NPY magic string")
    if len(data) < _PREAMBLE:
        raise TruncationError("stream ends inside the NPY preamble")
    major, minor = data[6], data[7]
    if (major, minor) != (1, 0):
        raise UnsupportedError(f"NPY version {major}.{minor} is not supported")
    (header_len,) = struct.unpack("<H", data[8:10])
    if len(data) < _PREAMBLE + header_len:
        raise TruncationError("stream ends inside the NPY header")
    raw_header = data[_PREAMBLE : _PREAMBLE + header_len]
    try:
        header = ast.literal_eval(raw_header.decode("latin1"))
    except (ValueError, SyntaxError) as exc:
        raise FormatError(f"unparsable NPY header: {exc}") from None
    if not isinstance(header, dict) or not {"descr", "fortran_order", "shape"} <= header.keys():
        raise FormatError("NPY header must be a dict with descr, fortran_order and shape")

    descr = header["descr"]
    if descr not in SUPPORTED_DESCR:
        raise UnsupportedError(f"dtype {descr!r} is not supported")
    if header["fortran_order"]:
        raise UnsupportedError("Fortran-ordered arrays are not supported")
    shape = header["shape"]
    if (
        not isinstance(shape, tuple)
        or len(shape) != 2
        or not all(isinstance(d, int) and d >= 0 for d in shape)
    ):
        raise UnsupportedError(f"only 2-D arrays are supported, got shape {shape!r}")

    dtype = SUPPORTED_DESCR[descr]
    count = shape[0] * shape[1]
    payload = data[_PREAMBLE + header_len :]
    needed = count * dtype.itemsize
    if len(payload) < needed:
        raise TruncationError(f"payload has {len(payload)} bytes, header promises {needed}")
    return np.frombuffer(payload[:needed], dtype=dtype).reshape(shape).copy()


def serialize_npy(array: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(array)
    if arr.ndim != 2:
        raise UnsupportedError("only 2-D arrays can be serialised")
    if arr.dtype.kind == "f":
        arr = arr.astype("<f8", copy=False)
        descr = "<f8"
    elif arr.dtype.kind in "iu":
        arr = arr.astype("<i8", copy=False)
        descr = "<i8"
    else:
        raise UnsupportedError(f"dtype {arr.dtype} cannot be serialised")
    header = f"{{'descr': '{descr}', 'fortran_order': False, 'shape': {arr.shape}, }}"
    # pad so the payload starts on a 64-byte boundary, header ends with newline
    total = _PREAMBLE + len(header) + 1
    header += " " * ((-total) % 64) + "\n"
    encoded = header.encode("latin1")
    return MAGIC + bytes([1, 0]) + struct.pack("<H", len(encoded)) + encoded + arr.tobytes()


def read_npy(path: str | Path) -> np.ndarray:
    return parse_npy(Path(path).read_bytes())


def write_npy(path: str | Path, array: np.ndarray) -> None:
    Path(path).write_bytes(serialize_npy(array))
