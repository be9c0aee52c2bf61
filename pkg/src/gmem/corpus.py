"""PBM I/O, synthetic QR-like corpora and occlusion."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .patterns import BitPattern, MaskedPattern, PatternSet, RegionSpec, apply_mask

_WS = b" \t\n\r\v\f"


class PBMError(ValueError):
    pass


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Skip whitespace and ``#`` comments, then read one token."""
    n = len(data)
    while pos < n:
        c = data[pos]
        if c == 0x23:  # '#'
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        elif c in _WS:
            pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos] not in _WS and data[pos] != 0x23:
        pos += 1
    if start == pos:
        raise PBMError("unexpected end of header")
    return data[start:pos], pos


def load_pbm(data: bytes) -> BitPattern:
    magic = data[:2]
    if magic not in (b"P1", b"P4"):
        raise PBMError(f"unsupported magic {magic!r}")
    pos = 2
    dims = []
    for _ in range(2):
        tok, pos = _read_token(data, pos)
        try:
            dims.append(int(tok))
        except ValueError:
            raise PBMError(f"bad dimension {tok!r}") from None
    width, height = dims
    if width <= 0 or height <= 0:
        raise PBMError(f"zero or negative dimensions {width}x{height}")
    size = width * height

    if magic == b"P1":
        raster = np.frombuffer(data[pos:], dtype=np.uint8)
        raster = raster[~np.isin(raster, np.frombuffer(_WS, dtype=np.uint8))]
        if raster.size < size:
            raise PBMError(f"truncated raster: {raster.size} of {size} cells")
        cells = raster[:size]
        if not np.all((cells == ord("0")) | (cells == ord("1"))):
            raise PBMError("P1 raster contains characters other than 0/1")
        return BitPattern(width, height, cells - ord("0"))

    pos += 1  # single whitespace byte ends the header
    row_bytes = (width + 7) // 8
    need = row_bytes * height
    raster = np.frombuffer(data[pos : pos + need], dtype=np.uint8)
    if raster.size < need:
        raise PBMError(f"truncated raster: {raster.size} of {need} bytes")
    bits = np.unpackbits(raster.reshape(height, row_bytes), axis=1)[:, :width]
    return BitPattern(width, height, bits.reshape(-1))


def save_pbm(p: BitPattern, binary: bool = False) -> bytes:
    header = f"{'P4' if binary else 'P1'}\n{p.width} {p.height}\n".encode("ascii")
    rows = p.as_matrix()
    if binary:
        return header + np.packbits(rows, axis=1).tobytes()
    # plain PBM lines should stay under 70 characters
    per_line = 35
    lines = []
    for row in rows:
        for k in range(0, p.width, per_line):
            lines.append(" ".join("1" if b else "0" for b in row[k : k + per_line]))
    return header + ("\n".join(lines) + "\n").encode("ascii")


# -- synthetic corpus --------------------------------------------------------


@dataclass(frozen=True)
class CorpusSpec:
    count: int
    width: int
    height: int
    density_range: tuple[float, float] = (0.475, 0.507)
    structural_overlay: bool = False
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.density_range
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError(f"density range must satisfy 0 <= lo <= hi <= 1, got {self.density_range}")
        if self.count < 1:
            raise ValueError(f"count must be at least 1, got {self.count}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"dimensions must be positive, got {self.width}x{self.height}")


def overlay_side(width: int) -> int:
    return max(7, width // 8)


def finder_motif(side: int) -> np.ndarray:
    """A QR finder pattern (7x7 concentric squares) scaled to ``side`` cells."""
    g = np.arange(side) * 7 // side
    gy, gx = np.meshgrid(g, g, indexing="ij")
    ring = np.minimum.reduce([gx, gy, 6 - gx, 6 - gy])
    return (ring != 1).astype(np.uint8)


def overlay_origins(width: int, height: int) -> list[tuple[int, int]]:
    """Top-left corners ``(x, y)`` of the three finder blocks."""
    s = overlay_side(width)
    return [(0, 0), (width - s, 0), (0, height - s)]


def _stamp_finders(bits: np.ndarray, width: int, height: int) -> np.ndarray:
    s = overlay_side(width)
    if 2 * s > width or 2 * s > height:
        raise ValueError(f"finder blocks of side {s} do not fit in {width}x{height}")
    grid = bits.reshape(height, width).copy()
    motif = finder_motif(s)
    for x, y in overlay_origins(width, height):
        grid[y : y + s, x : x + s] = motif
    return grid.reshape(-1)


def generate_corpus(spec: CorpusSpec) -> PatternSet:
    """Random patterns with per-pattern density drawn from ``spec.density_range``.

    Pattern ``p`` depends only on ``(spec.seed, p)``, so prefixes of larger
    corpora agree with smaller ones.
    """
    w, h = spec.width, spec.height
    size = w * h
    lo, hi = spec.density_range
    k_lo, k_hi = math.ceil(lo * size), math.floor(hi * size)
    if spec.structural_overlay:
        _stamp_finders(np.zeros(size, dtype=np.uint8), w, h)
    patterns = []
    for p in range(spec.count):
        rng = np.random.default_rng([spec.seed, p])
        d = lo + (hi - lo) * rng.random()
        ones = math.floor(d * size)
        if k_lo <= k_hi:
            ones = min(max(ones, k_lo), k_hi)
        bits = np.zeros(size, dtype=np.uint8)
        bits[rng.choice(size, size=ones, replace=False)] = 1
        if spec.structural_overlay:
            bits = _stamp_finders(bits, w, h)
        patterns.append(BitPattern(w, h, bits))
    return PatternSet(patterns)


def occlude(p: BitPattern, keep: RegionSpec) -> MaskedPattern:
    """Keep only ``keep`` visible; everything else is hidden from the net."""
    return apply_mask(p, keep)
