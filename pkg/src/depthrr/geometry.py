"""Depth-map container, statistics, and the range-reduction subtract/add pair.

Depth values are stored as 32-bit floats in millimeters.  Missing data is
represented with an explicit boolean validity mask; values at invalid pixels
are arbitrary and never participate in statistics or error metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyMask, MaskCoverage


@dataclass(frozen=True)
class Grid:
    """Pixel-to-world mapping: world = origin + index * pitch, in mm."""

    origin_x: float
    origin_y: float
    pitch_x: float = 1.0
    pitch_y: float = 1.0

    def __post_init__(self):
        if self.pitch_x <= 0 or self.pitch_y <= 0:
            raise ValueError("grid pitch must be positive")


@dataclass
class DepthMap:
    """2D grid of depth values (mm) with a validity mask and optional world grid."""

    values: np.ndarray
    valid: np.ndarray
    grid: Grid | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values)
        # residual maps keep float64 so subtract/add stay exactly invertible;
        # everything else is stored at float32
        if self.values.dtype != np.float64:
            self.values = self.values.astype(np.float32)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.values.ndim != 2 or self.values.size == 0:
            raise ValueError("depth values must be a non-empty 2D array")
        if self.valid.shape != self.values.shape:
            raise DimensionMismatch(
                f"mask shape {self.valid.shape} != value shape {self.values.shape}"
            )
        if not np.isfinite(self.values[self.valid]).all():
            raise ValueError("depth values must be finite at valid pixels")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def world_xy(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-pixel world x/y coordinate arrays (mm). Defaults to pixel units."""
        g = self.grid if self.grid is not None else Grid(0.0, 0.0, 1.0, 1.0)
        xs = g.origin_x + np.arange(self.width, dtype=np.float64) * g.pitch_x
        ys = g.origin_y + np.arange(self.height, dtype=np.float64) * g.pitch_y
        return np.meshgrid(xs, ys)

    def copy(self) -> "DepthMap":
        return DepthMap(self.values.copy(), self.valid.copy(), self.grid)


@dataclass(frozen=True)
class DepthStats:
    z_min: float
    z_max: float
    range: float
    valid_count: int


def depth_stats(z: DepthMap) -> DepthStats:
    """Extrema and range (max - min) over valid pixels only."""
    vals = z.values[z.valid]
    if vals.size == 0:
        raise EmptyMask("depth map has no valid pixels")
    z_min = float(vals.min())
    z_max = float(vals.max())
    return DepthStats(z_min=z_min, z_max=z_max, range=z_max - z_min,
                      valid_count=int(vals.size))


def _check_dims(a: DepthMap, b: DepthMap):
    if a.values.shape != b.values.shape:
        raise DimensionMismatch(
            f"shape {a.values.shape} != shape {b.values.shape}"
        )


def subtract(z: DepthMap, approx: DepthMap) -> DepthMap:
    """Range-reduced residual: z - approx at every valid pixel of z.

    The approximation must be valid wherever z is valid; the result carries
    z's mask and grid.  The residual is kept at float64: the exact difference
    of two float32 maps fits in a double, which is what makes add() a
    bit-for-bit inverse.
    """
    _check_dims(z, approx)
    if np.any(z.valid & ~approx.valid):
        raise MaskCoverage("approximation invalid at a valid depth pixel")
    out = np.asarray(z.values, dtype=np.float64) - np.asarray(approx.values, dtype=np.float64)
    out[~z.valid] = 0.0
    return DepthMap(out, z.valid.copy(), z.grid)


def add(z_r: DepthMap, approx: DepthMap) -> DepthMap:
    """Inverse of :func:`subtract`: recovers z from the residual."""
    _check_dims(z_r, approx)
    out = np.asarray(z_r.values, dtype=np.float64) + np.asarray(approx.values, dtype=np.float64)
    out[~z_r.valid] = 0.0
    return DepthMap(out.astype(np.float32), z_r.valid.copy(), z_r.grid)


def make_hemisphere(size: int, radius: float) -> DepthMap:
    """Synthetic hemisphere test fixture on a flat zero background.

    The pitch is chosen so the hemisphere diameter spans the image; every
    pixel is valid, so the depth range is exactly `radius` (apex minus rim).
    """
    if size <= 0:
        raise ValueError("size must be positive")
    if radius <= 0:
        raise ValueError("radius must be positive")
    pitch = 2.0 * radius / size
    coords = (np.arange(size, dtype=np.float64) - size // 2) * pitch
    xx, yy = np.meshgrid(coords, coords)
    z = np.sqrt(np.maximum(0.0, radius * radius - xx * xx - yy * yy))
    grid = Grid(origin_x=float(coords[0]), origin_y=float(coords[0]),
                pitch_x=pitch, pitch_y=pitch)
    return DepthMap(z.astype(np.float32), np.ones((size, size), dtype=bool), grid)
