"""GMEM1 weight files and PBM pattern-set directories.

Weight file layout (all little-endian)::

    magic    6s   b"GMEM1\\0"
    version  u16
    N        u32  stored patterns
    R        u32  width * height
    width    u32
    height   u32
    dtype    u8   0 = f64, 1 = f32, 2 = f16
    eps_w, eps_v, theta, tau   4 x f64
    W        N*R values, row-major
    V        N*R values, row-major
"""

from __future__ import annotations

import enum
import os
import struct
from pathlib import Path

import numpy as np

from .corpus import load_pbm, save_pbm
from .network import HyperParams, MemoryNet
from .patterns import PatternSet

MAGIC = b"GMEM1\0"
VERSION = 1
HEADER = struct.Struct("<6sHIIIIB4d")
HEADER_SIZE = HEADER.size
U32_MAX = 2**32 - 1
INDEX_FILE = "index.txt"


class FormatError(ValueError):
    pass


class DType(enum.IntEnum):
    F64 = 0
    F32 = 1
    F16 = 2

    @property
    def numpy(self) -> np.dtype:
        return np.dtype({0: "<f8", 1: "<f4", 2: "<f2"}[int(self)])

    @property
    def itemsize(self) -> int:
        return self.numpy.itemsize

    @classmethod
    def parse(cls, name: str) -> "DType":
        try:
            return {"f64": cls.F64, "f32": cls.F32, "f16": cls.F16}[name]
        except KeyError:
            raise ValueError(f"unknown dtype {name!r}; expected f64, f32 or f16") from None


def matrix_payload_size(n: int, r: int, dtype: DType) -> int:
    """Bytes taken by one weight matrix (``W`` or ``V``)."""
    cells = n * r
    if cells > U32_MAX:
        raise OverflowError(f"N*R = {cells} exceeds u32 range")
    return cells * DType(dtype).itemsize


def expected_file_size(n: int, r: int, dtype: DType) -> int:
    return HEADER_SIZE + 2 * matrix_payload_size(n, r, dtype)


def save_weights(net: MemoryNet, dtype: DType = DType.F64) -> bytes:
    dtype = DType(dtype)
    expected = expected_file_size(net.N, net.R, dtype)
    p = net.params
    header = HEADER.pack(
        MAGIC, VERSION, net.N, net.R, net.width, net.height, int(dtype),
        p.eps_w, p.eps_v, p.theta, p.tau,
    )
    out = header + net.W.astype(dtype.numpy).tobytes() + net.V.astype(dtype.numpy).tobytes()
    assert len(out) == expected
    return out


def load_weights(data: bytes) -> MemoryNet:
    if len(data) < HEADER_SIZE:
        raise FormatError(f"truncated header: {len(data)} of {HEADER_SIZE} bytes")
    magic, version, n, r, width, height, code, eps_w, eps_v, theta, tau = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if r != width * height:
        raise FormatError(f"R={r} does not match {width}x{height}")
    try:
        dtype = DType(code)
    except ValueError:
        raise FormatError(f"unknown dtype code {code}") from None
    size = expected_file_size(n, r, dtype)
    if len(data) != size:
        raise FormatError(f"payload length {len(data)} != expected {size}")
    payload = matrix_payload_size(n, r, dtype)
    W = np.frombuffer(data, dtype=dtype.numpy, count=n * r, offset=HEADER_SIZE)
    V = np.frombuffer(data, dtype=dtype.numpy, count=n * r, offset=HEADER_SIZE + payload)
    params = HyperParams(eps_w, eps_v, theta, tau)
    return MemoryNet.from_weights(
        width, height, params,
        W.astype(np.float64).reshape(n, r), V.astype(np.float64).reshape(n, r),
    )


# -- pattern sets ------------------------------------------------------------


def save_pattern_set(directory: os.PathLike, patterns: PatternSet, binary: bool = True) -> list[Path]:
    """Write one PBM per pattern plus ``index.txt`` listing them in order."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    digits = max(4, len(str(len(patterns) - 1)))
    names = []
    for i, p in enumerate(patterns):
        name = f"pattern_{i:0{digits}d}.pbm"
        (directory / name).write_bytes(save_pbm(p, binary=binary))
        names.append(name)
    (directory / INDEX_FILE).write_text("".join(n + "\n" for n in names))
    return [directory / n for n in names]


def load_pattern_set(directory: os.PathLike) -> PatternSet:
    directory = Path(directory)
    index = directory / INDEX_FILE
    if not index.exists():
        raise FileNotFoundError(f"no {INDEX_FILE} in {directory}")
    names = [line.strip() for line in index.read_text().splitlines() if line.strip()]
    if not names:
        raise ValueError(f"{index} lists no patterns")
    return PatternSet([load_pbm((directory / n).read_bytes()) for n in names])
