"""
Feature tensor files.

Layout: magic `DTN1` (float32) or `DTNH` (float16), little-endian uint32 rank (4),
four uint32 dims (B, C, H, W), then B*C*H*W little-endian values in row-major order.
"""

import struct
from typing import Union

import numpy as np
import torch as T

from herdwatch.common.enumerations import TensorDtype
from herdwatch.common.errors import MalformedInputError
from herdwatch.common.type_aliases import Tensor
from herdwatch.common.utils import to_numpy

MAGIC = {TensorDtype.FLOAT32: b"DTN1", TensorDtype.FLOAT16: b"DTNH"}
NUMPY_DTYPE = {TensorDtype.FLOAT32: "<f4", TensorDtype.FLOAT16: "<f2"}
RANK = 4


def load_tensor(path: str) -> T.Tensor:
    """Read a DTN1/DTNH file, widened to float64"""
    with open(path, "rb") as f:
        data = f.read()
    header_size = 4 + 4 * (1 + RANK)
    if len(data) < header_size:
        raise MalformedInputError(f"{path}: truncated header")
    dtypes = {magic: dtype for dtype, magic in MAGIC.items()}
    magic = data[:4]
    if magic not in dtypes:
        raise MalformedInputError(f"{path}: unknown magic {magic!r}")
    dtype = dtypes[magic]
    (rank,) = struct.unpack_from("<I", data, 4)
    if rank != RANK:
        raise MalformedInputError(f"{path}: rank must be {RANK}, got {rank}")
    dims = struct.unpack_from("<4I", data, 8)
    if min(dims) < 1:
        raise MalformedInputError(f"{path}: every dim must be >= 1, got {dims}")
    count = int(np.prod(dims))
    itemsize = np.dtype(NUMPY_DTYPE[dtype]).itemsize
    if len(data) != header_size + count * itemsize:
        raise MalformedInputError(
            f"{path}: expected {count} values after the header, "
            f"got {(len(data) - header_size) / itemsize:g}"
        )
    values = np.frombuffer(data, dtype=NUMPY_DTYPE[dtype], offset=header_size)
    return T.from_numpy(values.astype(np.float64).reshape(dims))


def save_tensor(
    tensor: Tensor, path: str, dtype: Union[str, TensorDtype] = TensorDtype.FLOAT32
) -> None:
    dtype = TensorDtype(dtype)
    array = np.asarray(to_numpy(tensor))
    if array.ndim != RANK:
        raise MalformedInputError(f"Only rank-{RANK} tensors can be saved, got {array.ndim}")
    with open(path, "wb") as f:
        f.write(MAGIC[dtype])
        f.write(struct.pack("<I", RANK))
        f.write(struct.pack("<4I", *array.shape))
        f.write(np.ascontiguousarray(array, dtype=NUMPY_DTYPE[dtype]).tobytes())
