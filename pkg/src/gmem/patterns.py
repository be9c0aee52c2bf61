"""Binary pattern and mask value types.

Patterns are stored flat in row-major order: cell (x, y) lives at index
``y * width + x``. A black module is 1, a white module is 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np


class DimensionError(ValueError):
    """Raised when pattern, mask or net dimensions disagree."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BitPattern:
    width: int
    height: int
    bits: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DimensionError(f"dimensions must be positive, got {self.width}x{self.height}")
        raw = np.asarray(self.bits)
        if raw.ndim != 1:
            raw = raw.reshape(-1)
        if raw.size != self.width * self.height:
            raise DimensionError(
                f"length {raw.size} != {self.width * self.height} ({self.width}x{self.height})"
            )
        if raw.size and not np.all((raw == 0) | (raw == 1)):
            raise ValueError("pattern values must be exactly 0 or 1")
        object.__setattr__(self, "bits", _frozen(raw.astype(np.uint8)))

    @property
    def size(self) -> int:
        return self.width * self.height

    @property
    def shape(self) -> tuple[int, int]:
        return self.width, self.height

    def as_matrix(self) -> np.ndarray:
        """Return the bits as a ``(height, width)`` array."""
        return self.bits.reshape(self.height, self.width)

    def __eq__(self, other):
        if not isinstance(other, BitPattern):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.width, self.height, self.bits.tobytes()))

    def __repr__(self):
        return f"BitPattern({self.width}x{self.height}, density={density(self):.4f})"


@dataclass(frozen=True, eq=False)
class MaskedPattern:
    """A pattern plus the set of cells that are actually shown to the net."""

    pattern: BitPattern
    presented: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.presented, dtype=bool).reshape(-1)
        if mask.size != self.pattern.size:
            raise DimensionError(f"mask length {mask.size} != pattern length {self.pattern.size}")
        if not mask.any():
            raise ValueError("mask presents no cells")
        object.__setattr__(self, "presented", _frozen(mask))

    @classmethod
    def full(cls, pattern: BitPattern) -> "MaskedPattern":
        return cls(pattern, np.ones(pattern.size, dtype=bool))

    @property
    def presented_count(self) -> int:
        return int(self.presented.sum())

    def visible_bits(self) -> np.ndarray:
        """Bits with the hidden cells zeroed."""
        return self.pattern.bits & self.presented


@dataclass(frozen=True)
class PatternSet:
    patterns: tuple

    def __init__(self, patterns: Sequence[BitPattern]):
        patterns = tuple(patterns)
        if not patterns:
            raise ValueError("pattern set must be nonempty")
        shape = patterns[0].shape
        for i, p in enumerate(patterns):
            if p.shape != shape:
                raise DimensionError(f"pattern {i} is {p.width}x{p.height}, expected {shape[0]}x{shape[1]}")
        object.__setattr__(self, "patterns", patterns)

    @property
    def width(self) -> int:
        return self.patterns[0].width

    @property
    def height(self) -> int:
        return self.patterns[0].height

    def __len__(self):
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def __getitem__(self, i):
        return self.patterns[i]


def make_pattern(width: int, height: int, bits: Sequence[int]) -> BitPattern:
    return BitPattern(width, height, np.asarray(bits))


def density(p: BitPattern) -> float:
    return int(p.bits.sum()) / p.size


# -- regions -----------------------------------------------------------------


@dataclass(frozen=True)
class Rect:
    x0: int
    y0: int
    w: int
    h: int


@dataclass(frozen=True)
class BottomRight:
    """Bottom-right rectangle covering roughly ``fraction`` of the area."""

    fraction: float


RegionSpec = Union[Rect, BottomRight]


def bottom_right_rect(width: int, height: int, fraction: float) -> Rect:
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"keep fraction must be in (0, 1], got {fraction}")
    scale = math.sqrt(fraction)
    # the epsilon keeps exact products such as 100*sqrt(0.01) from flooring down
    w = max(1, min(width, math.floor(width * scale + 1e-9)))
    h = max(1, min(height, math.floor(height * scale + 1e-9)))
    return Rect(width - w, height - h, w, h)


def resolve_region(width: int, height: int, region: RegionSpec) -> Rect:
    if isinstance(region, BottomRight):
        return bottom_right_rect(width, height, region.fraction)
    if isinstance(region, Rect):
        return region
    raise TypeError(f"unsupported region {region!r}")


def parse_region(text: str) -> RegionSpec:
    """Parse ``"bottom-right 0.25"`` or ``"rect x0,y0,w,h"``."""
    kind, _, arg = text.strip().partition(" ")
    if kind == "bottom-right":
        return BottomRight(float(arg))
    if kind == "rect":
        x0, y0, w, h = (int(v) for v in arg.split(","))
        return Rect(x0, y0, w, h)
    raise ValueError(f"cannot parse region {text!r}")


def apply_mask(p: BitPattern, region: RegionSpec) -> MaskedPattern:
    r = resolve_region(p.width, p.height, region)
    if r.w <= 0 or r.h <= 0:
        raise ValueError(f"empty region {r}")
    if r.x0 < 0 or r.y0 < 0 or r.x0 + r.w > p.width or r.y0 + r.h > p.height:
        raise DimensionError(f"region {r} outside {p.width}x{p.height}")
    mask = np.zeros((p.height, p.width), dtype=bool)
    mask[r.y0 : r.y0 + r.h, r.x0 : r.x0 + r.w] = True
    return MaskedPattern(p, mask.reshape(-1))


def random_pattern(width: int, height: int, density: float, seed: int) -> BitPattern:
    """Pattern with exactly ``floor(density * width * height)`` ones, placed uniformly."""
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density must be in [0, 1], got {density}")
    size = width * height
    ones = math.floor(density * size)
    return _pattern_with_ones(width, height, ones, np.random.default_rng(seed))


def _pattern_with_ones(width: int, height: int, ones: int, rng: np.random.Generator) -> BitPattern:
    size = width * height
    bits = np.zeros(size, dtype=np.uint8)
    bits[rng.choice(size, size=ones, replace=False)] = 1
    return BitPattern(width, height, bits)
