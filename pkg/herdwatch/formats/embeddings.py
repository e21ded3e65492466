"""
Embedding stream files.

Layout: magic `EMB1`, little-endian uint32 count, uint32 dim, one dtype byte
(0 = single32, 1 = half16), then count*dim little-endian values in row-major order.
"""

import struct
from typing import Tuple, Union

import numpy as np

from herdwatch.common.enumerations import Precision
from herdwatch.common.errors import MalformedInputError

MAGIC = b"EMB1"
DTYPE_CODES = {0: Precision.SINGLE32, 1: Precision.HALF16}
HEADER = struct.Struct("<4sIIB")


def load_embeddings(path: str) -> Tuple[np.ndarray, Precision]:
    """:return: (count, dim) float64 array and the stored precision"""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < HEADER.size:
        raise MalformedInputError(f"{path}: truncated header")
    magic, count, dim, code = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise MalformedInputError(f"{path}: unknown magic {magic!r}")
    if code not in DTYPE_CODES:
        raise MalformedInputError(f"{path}: unknown dtype code {code}")
    precision = DTYPE_CODES[code]
    expected = HEADER.size + count * dim * precision.nbytes
    if len(data) != expected:
        raise MalformedInputError(f"{path}: expected {expected} bytes, got {len(data)}")
    values = np.frombuffer(data, dtype=precision.numpy_dtype, offset=HEADER.size)
    return values.astype(np.float64).reshape(count, dim), precision


def save_embeddings(
    embeddings: np.ndarray, path: str, precision: Union[str, Precision] = Precision.HALF16
) -> None:
    precision = Precision(precision)
    embeddings = np.asarray(embeddings)
    if embeddings.ndim != 2:
        raise MalformedInputError(f"Expected a (count, dim) array, got shape {embeddings.shape}")
    code = {p: c for c, p in DTYPE_CODES.items()}[precision]
    count, dim = embeddings.shape
    with open(path, "wb") as f:
        f.write(HEADER.pack(MAGIC, count, dim, code))
        f.write(np.ascontiguousarray(embeddings, dtype=precision.numpy_dtype).tobytes())
