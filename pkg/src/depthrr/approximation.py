"""Low-overhead depth approximations.

The encoder subtracts an approximation of the scene from the depth map to
shrink its depth range; the decoder regenerates the *same* approximation from
a small amount of stored overhead and adds it back.  Three kinds are
supported:

  * identity  — all-zero approximation (plain encoding, no reduction)
  * thumbnail — block-mean downsample stored as a quantized 16-bit grid,
                regenerated by deterministic Catmull-Rom bicubic upsampling
  * sphere    — analytic sphere described by four numbers (center + radius)

Determinism matters: encoder and decoder must compute bit-identical
approximations, so all resampling here is fixed-kernel float64 numpy with no
library-dependent resize paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DegenerateInput, DimensionMismatch, EmptyMask
from .geometry import DepthMap, Grid
from .transforms import IDENTITY, apply_transform

_U16_MAX = 65535


@dataclass(frozen=True)
class Thumbnail:
    """Quantized block-mean grid plus the scale/offset to restore mm depths."""

    samples: np.ndarray  # uint16, (height, width)
    z_min: float
    z_range: float
    block_w: int
    block_h: int
    target_w: int
    target_h: int

    def __post_init__(self):
        object.__setattr__(self, "samples",
                           np.asarray(self.samples, dtype=np.uint16))
        if self.samples.ndim != 2 or self.samples.size == 0:
            raise ValueError("thumbnail samples must be a non-empty 2D array")
        if self.z_range < 0:
            raise ValueError("z_range must be non-negative")
        exp_w = -(-self.target_w // self.block_w)
        exp_h = -(-self.target_h // self.block_h)
        if self.samples.shape != (exp_h, exp_w):
            raise DimensionMismatch(
                f"thumbnail {self.samples.shape} inconsistent with "
                f"{self.target_w}x{self.target_h} / {self.block_w}x{self.block_h} blocking"
            )

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    def dequantize(self) -> np.ndarray:
        """Cell values back in mm, float64."""
        return self.z_min + (self.samples.astype(np.float64) / _U16_MAX) * self.z_range


@dataclass(frozen=True)
class SphereParams:
    cx: float
    cy: float
    cz: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("sphere radius must be positive")


@dataclass
class ApproximationSpec:
    """Tagged recipe for regenerating the approximation at decode time."""

    kind: str  # "identity" | "thumbnail" | "sphere"
    thumbnail: Thumbnail | None = None
    sphere: SphereParams | None = None
    transform: np.ndarray = None

    def __post_init__(self):
        if self.transform is None:
            self.transform = IDENTITY.copy()
        self.transform = np.asarray(self.transform, dtype=np.float64)
        if self.transform.shape != (4, 4):
            raise ValueError("transform must be 4x4")
        if self.kind not in ("identity", "thumbnail", "sphere"):
            raise ValueError(f"unknown approximation kind {self.kind!r}")
        if self.kind == "thumbnail" and self.thumbnail is None:
            raise ValueError("thumbnail spec requires a thumbnail payload")
        if self.kind == "sphere" and self.sphere is None:
            raise ValueError("sphere spec requires sphere parameters")
        if self.kind == "identity" and (self.thumbnail is not None
                                        or self.sphere is not None):
            raise ValueError("identity spec carries no payload")

    @classmethod
    def identity(cls) -> "ApproximationSpec":
        return cls(kind="identity")


def block_mean_thumbnail(z: DepthMap, block_w: int, block_h: int) -> Thumbnail:
    """Downsample by averaging valid pixels in each non-overlapping block.

    Edge blocks may be partial and average only the pixels present.  Blocks
    containing no valid pixels are filled from the nearest valid cell so the
    upsampled approximation is defined everywhere.
    """
    if block_w < 1 or block_h < 1:
        raise ValueError("block sizes must be >= 1")
    if not z.valid.any():
        raise EmptyMask("depth map has no valid pixels")

    th = -(-z.height // block_h)
    tw = -(-z.width // block_w)
    vals = np.where(z.valid, z.values.astype(np.float64), 0.0)
    sums = np.zeros((th, tw))
    counts = np.zeros((th, tw))
    # pad to a whole number of blocks, then reduce
    ph, pw = th * block_h, tw * block_w
    vpad = np.zeros((ph, pw))
    cpad = np.zeros((ph, pw))
    vpad[: z.height, : z.width] = vals
    cpad[: z.height, : z.width] = z.valid.astype(np.float64)
    sums = vpad.reshape(th, block_h, tw, block_w).sum(axis=(1, 3))
    counts = cpad.reshape(th, block_h, tw, block_w).sum(axis=(1, 3))

    filled = counts > 0
    means = np.zeros((th, tw))
    means[filled] = sums[filled] / counts[filled]
    if not filled.all():
        # nearest-valid-cell propagation into empty blocks
        _, (iy, ix) = ndimage.distance_transform_edt(~filled, return_indices=True)
        means = means[iy, ix]

    z_min = float(means.min())
    z_range = float(means.max() - means.min())
    if z_range > 0:
        q = np.floor((means - z_min) / z_range * _U16_MAX + 0.5)
    else:
        q = np.zeros_like(means)
    return Thumbnail(samples=q.astype(np.uint16), z_min=z_min, z_range=z_range,
                     block_w=block_w, block_h=block_h,
                     target_w=z.width, target_h=z.height)


def _catmull_rom_weights(t: np.ndarray) -> np.ndarray:
    """Weights for taps at offsets -1..2, a = -0.5.  Shape (len(t), 4)."""
    t2 = t * t
    t3 = t2 * t
    w = np.empty((t.size, 4))
    w[:, 0] = -0.5 * t3 + t2 - 0.5 * t
    w[:, 1] = 1.5 * t3 - 2.5 * t2 + 1.0
    w[:, 2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t
    w[:, 3] = 0.5 * t3 - 0.5 * t2
    # guard against accumulated rounding so constants are reproduced
    w /= w.sum(axis=1, keepdims=True)
    return w


def _resize_matrix(n_src: int, n_dst: int) -> np.ndarray:
    """Dense (n_dst, n_src) interpolation matrix along one axis.

    End-aligned mapping: the first and last cells land on the first and last
    output pixels, so no tap ever extrapolates past the grid by more than the
    kernel support.  Taps outside the grid clamp to the border cell.
    """
    if n_dst > 1:
        u = np.arange(n_dst, dtype=np.float64) * ((n_src - 1) / (n_dst - 1))
    else:
        u = np.zeros(1)
    i0 = np.floor(u).astype(np.int64)
    w = _catmull_rom_weights(u - i0)
    m = np.zeros((n_dst, n_src))
    rows = np.arange(n_dst)
    for tap in range(4):
        cols = np.clip(i0 + tap - 1, 0, n_src - 1)
        np.add.at(m, (rows, cols), w[:, tap])
    return m


def upsample_bicubic(t: Thumbnail) -> DepthMap:
    """Regenerate the full-resolution approximation from a thumbnail.

    Separable Catmull-Rom interpolation with end-aligned cells and clamped
    borders.  Pure float64 numpy, so identical input bits give identical
    output bits everywhere.
    """
    cells = t.dequantize()
    wy = _resize_matrix(t.height, t.target_h)
    wx = _resize_matrix(t.width, t.target_w)
    full = wy @ cells @ wx.T
    return DepthMap(full.astype(np.float32),
                    np.ones(full.shape, dtype=bool))


def fit_sphere(points) -> SphereParams:
    """Algebraic least-squares sphere fit.

    Linearizes |p - c|^2 = r^2 into A @ [cx, cy, cz, k] = |p|^2 with
    k = r^2 - |c|^2 and solves by least squares.  Exact for points sampled
    on a sphere; raises DegenerateInput for coplanar/collinear input.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if pts.shape[0] < 4:
        raise DegenerateInput("sphere fit needs at least 4 points")
    a = np.hstack([2.0 * pts, np.ones((pts.shape[0], 1))])
    b = (pts * pts).sum(axis=1)
    sol, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < 4:
        raise DegenerateInput("points are coplanar or collinear")
    center = sol[:3]
    r2 = sol[3] + float(center @ center)
    if r2 <= 0:
        raise DegenerateInput("fitted radius is not positive")
    return SphereParams(cx=float(center[0]), cy=float(center[1]),
                        cz=float(center[2]), radius=math.sqrt(r2))


def rasterize_sphere(s: SphereParams, grid: Grid, width: int, height: int) -> DepthMap:
    """Depth map of the viewer-facing hemisphere of a sphere.

    Outside the sphere's silhouette the map continues flat at z = cz so the
    approximation is defined at every pixel.
    """
    xs = grid.origin_x + np.arange(width, dtype=np.float64) * grid.pitch_x
    ys = grid.origin_y + np.arange(height, dtype=np.float64) * grid.pitch_y
    xx, yy = np.meshgrid(xs, ys)
    d2 = (xx - s.cx) ** 2 + (yy - s.cy) ** 2
    r2 = s.radius * s.radius
    z = s.cz + np.sqrt(np.maximum(r2 - d2, 0.0))
    return DepthMap(z.astype(np.float32), np.ones((height, width), dtype=bool),
                    grid)


def _transformed_sphere(s: SphereParams, t: np.ndarray) -> SphereParams:
    """Sphere after an alignment transform.

    The center is mapped as a point; the radius is scaled by the geometric
    mean of the linear part's scaling (non-uniform scale is approximated by
    the equivalent-volume sphere).
    """
    center = apply_transform([(s.cx, s.cy, s.cz)], t)[0]
    det = abs(np.linalg.det(np.asarray(t, dtype=np.float64)[:3, :3]))
    radius = s.radius * det ** (1.0 / 3.0)
    return SphereParams(cx=float(center[0]), cy=float(center[1]),
                        cz=float(center[2]), radius=float(radius))


def build_approximation(spec: ApproximationSpec, width: int, height: int,
                        grid: Grid | None = None) -> DepthMap:
    """Regenerate the approximation a spec describes, at full resolution.

    Both encoder and decoder call this on the (serialized round-tripped)
    spec, which is what guarantees they subtract and add back bit-identical
    values.
    """
    if spec.kind == "identity":
        return DepthMap(np.zeros((height, width), dtype=np.float32),
                        np.ones((height, width), dtype=bool), grid)
    if spec.kind == "thumbnail":
        t = spec.thumbnail
        if (t.target_w, t.target_h) != (width, height):
            raise DimensionMismatch(
                f"thumbnail targets {t.target_w}x{t.target_h}, "
                f"requested {width}x{height}"
            )
        out = upsample_bicubic(t)
        out.grid = grid
        return out
    # sphere
    g = grid if grid is not None else Grid(0.0, 0.0, 1.0, 1.0)
    sphere = _transformed_sphere(spec.sphere, spec.transform)
    return rasterize_sphere(sphere, g, width, height)
