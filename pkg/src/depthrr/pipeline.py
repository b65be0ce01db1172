"""High-level encode/decode pipeline gluing the modules together.

The encoder deliberately rebuilds its approximation from the
serialized-then-deserialized sidecar before subtracting.  Whatever the
decoder will compute from the stored bytes is therefore exactly what the
encoder removed, and reconstruction error is bounded by codec quantization
(plus image compression loss) alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import codec
from .approximation import ApproximationSpec, build_approximation
from .container import (Sidecar, deserialize_sidecar, read_container,
                        serialize_sidecar, sidecar_approx_spec, write_container)
from .geometry import DepthMap, Grid, add, depth_stats, subtract


@dataclass(frozen=True)
class EncodeResult:
    total_bytes: int
    original_range_mm: float
    reduced_range_mm: float

    @property
    def range_reduction_pct(self) -> float:
        if self.original_range_mm == 0:
            return 0.0
        return 100.0 * (1.0 - self.reduced_range_mm / self.original_range_mm)


def _sidecar_for(spec: ApproximationSpec, cfg: codec.CodecConfig,
                 z_min: float, z_range: float, image_format: str,
                 jpeg_quality: int | None, grid: Grid | None,
                 stem_name: str) -> Sidecar:
    ext = ".png" if image_format == "PNG" else ".jpg"
    g = grid if grid is not None else Grid(0.0, 0.0, 1.0, 1.0)
    sc = Sidecar(
        method=cfg.method,
        n=cfg.n,
        p_mm=z_range / cfg.n,
        zr_min_mm=z_min,
        zr_range_mm=z_range,
        image_format=image_format,
        jpeg_quality=jpeg_quality if image_format == "JPEG" else None,
        image_file=stem_name + ext,
        stair_levels=cfg.stair_levels,
        approx_kind=spec.kind,
        transform=tuple(np.asarray(spec.transform).reshape(16)),
        grid_origin_x=g.origin_x, grid_origin_y=g.origin_y,
        grid_pitch_x=g.pitch_x, grid_pitch_y=g.pitch_y,
    )
    if spec.kind == "thumbnail":
        t = spec.thumbnail
        sc.thumb_file = stem_name + ".thumb.png"
        sc.block_w = t.block_w
        sc.block_h = t.block_h
        sc.target_w = t.target_w
        sc.target_h = t.target_h
        sc.thumb_z_min = t.z_min
        sc.thumb_z_range = t.z_range
    elif spec.kind == "sphere":
        sc.sphere_cx = spec.sphere.cx
        sc.sphere_cy = spec.sphere.cy
        sc.sphere_cz = spec.sphere.cz
        sc.sphere_radius = spec.sphere.radius
    return sc


def stored_approximation(spec: ApproximationSpec, z: DepthMap) -> DepthMap:
    """The approximation exactly as the decoder will regenerate it.

    Runs the approximation spec through sidecar text serialization so any representation
    loss (none is expected; floats round-trip via repr and the thumbnail is
    already quantized) happens on the encode side too.
    """
    probe = _sidecar_for(spec, codec.CodecConfig(method="MWD", n=1.0),
                         z_min=0.0, z_range=1.0, image_format="PNG",
                         jpeg_quality=None, grid=z.grid, stem_name="probe")
    roundtripped = deserialize_sidecar(serialize_sidecar(probe))
    spec_rt = sidecar_approx_spec(roundtripped, spec.thumbnail)
    return build_approximation(spec_rt, z.width, z.height, z.grid)


def encode_depth(z: DepthMap, spec: ApproximationSpec, cfg: codec.CodecConfig,
                 out_stem: str, image_format: str = "PNG",
                 jpeg_quality: int | None = None) -> EncodeResult:
    """Full encode path: approximate, subtract, encode, write container."""
    import os

    approx = stored_approximation(spec, z)
    z_r = subtract(z, approx)
    img, z_min, z_range = codec.encode(z_r, cfg)
    sc = _sidecar_for(spec, cfg, z_min, z_range, image_format, jpeg_quality,
                      z.grid, os.path.basename(out_stem))
    total = write_container(img, sc, out_stem, thumbnail=spec.thumbnail)
    return EncodeResult(total_bytes=total,
                        original_range_mm=depth_stats(z).range,
                        reduced_range_mm=z_range)


def decode_depth(path: str) -> DepthMap:
    """Full decode path: read container, decode residual, regenerate and add."""
    img, sc, thumbnail = read_container(path)
    cfg = codec.CodecConfig(method=sc.method, n=sc.n,
                            stair_levels=sc.stair_levels)
    z_r = codec.decode(img, sc.zr_min_mm, sc.zr_range_mm, cfg)
    spec = sidecar_approx_spec(sc, thumbnail)
    approx = build_approximation(spec, img.width, img.height, sc.grid())
    out = add(z_r, approx)
    out.grid = sc.grid()
    return out
