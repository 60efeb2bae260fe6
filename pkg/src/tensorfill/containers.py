"""Binary tensor containers.

Tensor files ("DTC1"): magic bytes, K as uint32 little-endian, K mode sizes
as uint32 LE, then N float64 LE values in row-major order.
Mask files ("DTM1"): same header, then N bytes holding 0 or 1.
"""

from __future__ import annotations

import struct

import numpy as np

from .tensors import DenseTensor, ObservationMask, validate_dims

TENSOR_MAGIC = b"DTC1"
MASK_MAGIC = b"DTM1"


class ContainerError(ValueError):
    """Raised for malformed container files."""


def _write_header(fh, magic: bytes, dims) -> None:
    fh.write(magic)
    fh.write(struct.pack("<I", len(dims)))
    fh.write(struct.pack(f"<{len(dims)}I", *dims))


def _read_header(fh, magic: bytes, path) -> tuple[int, ...]:
    got = fh.read(4)
    if got != magic:
        raise ContainerError(f"{path}: bad magic {got!r}, expected {magic!r}")
    raw = fh.read(4)
    if len(raw) != 4:
        raise ContainerError(f"{path}: truncated header")
    (k,) = struct.unpack("<I", raw)
    raw = fh.read(4 * k)
    if len(raw) != 4 * k:
        raise ContainerError(f"{path}: truncated dimension list")
    dims = struct.unpack(f"<{k}I", raw)
    try:
        return validate_dims(dims)
    except ValueError as exc:
        raise ContainerError(f"{path}: {exc}") from exc


def write_tensor(path, tensor: DenseTensor) -> None:
    with open(path, "wb") as fh:
        _write_header(fh, TENSOR_MAGIC, tensor.dims)
        fh.write(tensor.flat.astype("<f8", copy=False).tobytes())


def read_tensor(path) -> DenseTensor:
    with open(path, "rb") as fh:
        dims = _read_header(fh, TENSOR_MAGIC, path)
        n = int(np.prod(dims))
        raw = fh.read(8 * n)
        if len(raw) != 8 * n:
            raise ContainerError(f"{path}: expected {n} values, file truncated")
        values = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    return DenseTensor(values.reshape(dims), copy=False)


def write_mask(path, mask: ObservationMask) -> None:
    with open(path, "wb") as fh:
        _write_header(fh, MASK_MAGIC, mask.dims)
        fh.write(mask.flat.astype(np.uint8).tobytes())


def read_mask(path) -> ObservationMask:
    with open(path, "rb") as fh:
        dims = _read_header(fh, MASK_MAGIC, path)
        n = int(np.prod(dims))
        raw = fh.read(n)
        if len(raw) != n:
            raise ContainerError(f"{path}: expected {n} flags, file truncated")
        flags = np.frombuffer(raw, dtype=np.uint8)
        if flags.max(initial=0) > 1:
            raise ContainerError(f"{path}: mask bytes must be 0 or 1")
    return ObservationMask(flags.astype(bool).reshape(dims), copy=False)
