"""Sinusoidal depth-to-RGB codecs.

Two encoders are provided, both writing three 8-bit channels:

  MWD — red/green carry sin/cos of the depth phase, blue carries the
        normalized depth used as a coarse unwrapping cue.
  DD  — red/green as MWD, blue carries a quantized stair image holding the
        period index directly.

The depth phase is referenced to the map minimum: phi = 2*pi*(z - z_min)/P
with fringe width P = range/n.  Invalid pixels are written as (0, 0, 0),
which no valid pixel can produce (it would need sin = cos = -1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPositivePeriods, NonPositiveRange, ZeroRange
from .geometry import DepthMap, depth_stats

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EncodedImage:
    """Three 8-bit channel planes of equal dimensions."""

    r: np.ndarray
    g: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        for name in ("r", "g", "b"):
            object.__setattr__(self, name,
                               np.asarray(getattr(self, name), dtype=np.uint8))
        if not (self.r.shape == self.g.shape == self.b.shape) or self.r.ndim != 2:
            raise ValueError("channel planes must share 2D dimensions")

    @property
    def width(self) -> int:
        return self.r.shape[1]

    @property
    def height(self) -> int:
        return self.r.shape[0]

    def to_array(self) -> np.ndarray:
        """(H, W, 3) uint8 view for image I/O."""
        return np.stack([self.r, self.g, self.b], axis=-1)

    @classmethod
    def from_array(cls, rgb: np.ndarray) -> "EncodedImage":
        rgb = np.asarray(rgb, dtype=np.uint8)
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise ValueError("expected an (H, W, 3) array")
        return cls(rgb[..., 0], rgb[..., 1], rgb[..., 2])


@dataclass(frozen=True)
class CodecConfig:
    method: str  # "MWD" | "DD"
    n: float
    stair_levels: int | None = None  # DD only; defaults to ceil(n)

    def __post_init__(self):
        if self.method not in ("MWD", "DD"):
            raise ValueError(f"unknown codec method {self.method!r}")
        if self.n <= 0:
            raise NonPositivePeriods("encoding periods n must be positive")
        if self.stair_levels is not None and self.stair_levels < math.ceil(self.n):
            raise ValueError("stair_levels must be >= ceil(n)")

    @property
    def stairs(self) -> int:
        if self.stair_levels is not None:
            return self.stair_levels
        return max(1, math.ceil(self.n))


def fringe_width(range_mm: float, n: float) -> float:
    """Depth distance spanned by one sinusoidal period: P = range / n."""
    if range_mm <= 0:
        raise NonPositiveRange("depth range must be positive")
    if n <= 0:
        raise NonPositivePeriods("encoding periods n must be positive")
    return range_mm / n


def quantize_unit(v: np.ndarray) -> np.ndarray:
    """Map [0, 1] floats to uint8: round-half-away-from-zero of 255*v after clamping."""
    return np.floor(np.clip(v, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def mwd_channel_values(z: np.ndarray, z_min: float, range_mm: float,
                       p: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pre-quantization MWD channel values for an array of depths (float64)."""
    z = np.asarray(z, dtype=np.float64)
    phase = _TWO_PI * (z - z_min) / p
    r = 0.5 + 0.5 * np.sin(phase)
    g = 0.5 + 0.5 * np.cos(phase)
    b = (z - z_min) / range_mm
    return r, g, b


def _prep(z_r: DepthMap, cfg: CodecConfig):
    stats = depth_stats(z_r)
    if stats.range == 0:
        raise ZeroRange("all valid depth values are equal")
    p = fringe_width(stats.range, cfg.n)
    return stats, p


def mwd_encode(z_r: DepthMap, cfg: CodecConfig) -> tuple[EncodedImage, float, float]:
    """Encode a depth map with the sin/cos + normalized-depth scheme.

    Returns the image plus (z_min, range) needed by the decoder.
    """
    stats, p = _prep(z_r, cfg)
    rf, gf, bf = mwd_channel_values(z_r.values, stats.z_min, stats.range, p)
    r = quantize_unit(rf)
    g = quantize_unit(gf)
    b = quantize_unit(bf)
    invalid = ~z_r.valid
    r[invalid] = 0
    g[invalid] = 0
    b[invalid] = 0
    return EncodedImage(r, g, b), stats.z_min, stats.range


def _wrapped_phase(img: EncodedImage) -> np.ndarray:
    """Phase in [0, 2*pi) recovered from the sin/cos channels."""
    s = img.r.astype(np.float64) / 255.0 - 0.5
    c = img.g.astype(np.float64) / 255.0 - 0.5
    return np.mod(np.arctan2(s, c), _TWO_PI)


def _invalid_marker(img: EncodedImage) -> np.ndarray:
    return (img.r == 0) & (img.g == 0) & (img.b == 0)


def mwd_decode(img: EncodedImage, z_min: float, range_mm: float,
               cfg: CodecConfig) -> DepthMap:
    """Recover depth: arctangent phase plus blue-channel coarse unwrap.

    Total by construction: corrupted pixels yield clamped, not missing,
    values.  Only the (0,0,0) invalid marker is masked out.
    """
    if range_mm <= 0:
        raise NonPositiveRange("depth range must be positive")
    p = fringe_width(range_mm, cfg.n)
    phi = _wrapped_phase(img)
    frac = phi / _TWO_PI
    z_coarse = (img.b.astype(np.float64) / 255.0) * range_mm
    k = np.floor((z_coarse - p * frac) / p + 0.5)
    k = np.clip(k, 0, math.ceil(cfg.n))
    z = z_min + p * (frac + k)
    z = np.clip(z, z_min, z_min + range_mm)
    mask = _invalid_marker(img)
    z[mask] = z_min
    return DepthMap(z.astype(np.float32), ~mask)


def dd_encode(z_r: DepthMap, cfg: CodecConfig) -> tuple[EncodedImage, float, float]:
    """Encode with sin/cos fringes plus a quantized period-index stair channel."""
    stats, p = _prep(z_r, cfg)
    rf, gf, _ = mwd_channel_values(z_r.values, stats.z_min, stats.range, p)
    stair = np.floor((z_r.values.astype(np.float64) - stats.z_min) / p)
    bf = stair / cfg.stairs
    r = quantize_unit(rf)
    g = quantize_unit(gf)
    b = quantize_unit(bf)
    invalid = ~z_r.valid
    r[invalid] = 0
    g[invalid] = 0
    b[invalid] = 0
    return EncodedImage(r, g, b), stats.z_min, stats.range


def dd_decode(img: EncodedImage, z_min: float, range_mm: float,
              cfg: CodecConfig) -> DepthMap:
    """Inverse of dd_encode: period index read directly from the stair channel."""
    if range_mm <= 0:
        raise NonPositiveRange("depth range must be positive")
    p = fringe_width(range_mm, cfg.n)
    phi = _wrapped_phase(img)
    frac = phi / _TWO_PI
    k = np.floor(cfg.stairs * img.b.astype(np.float64) / 255.0 + 0.5)
    k = np.clip(k, 0, math.ceil(cfg.n))
    z = z_min + p * (frac + k)
    z = np.clip(z, z_min, z_min + range_mm)
    mask = _invalid_marker(img)
    z[mask] = z_min
    return DepthMap(z.astype(np.float32), ~mask)


def encode(z_r: DepthMap, cfg: CodecConfig) -> tuple[EncodedImage, float, float]:
    if cfg.method == "MWD":
        return mwd_encode(z_r, cfg)
    return dd_encode(z_r, cfg)


def decode(img: EncodedImage, z_min: float, range_mm: float,
           cfg: CodecConfig) -> DepthMap:
    if cfg.method == "MWD":
        return mwd_decode(img, z_min, range_mm, cfg)
    return dd_decode(img, z_min, range_mm, cfg)
