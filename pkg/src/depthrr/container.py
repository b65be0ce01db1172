"""On-disk formats: depth-map ingestion, the three-part container
(encoded image + sidecar text + optional thumbnail PNG), and sidecar
serialization.

A container written to stem `scan` consists of:

  scan.meta       UTF-8 key=value sidecar (# comments allowed)
  scan.png/.jpg   the 8-bit RGB encoded image
  scan.thumb.png  16-bit grayscale thumbnail payload (thumbnail specs only)

The reported container size is the byte sum of all parts.
"""

from __future__ import annotations

import io
import os
import struct
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .approximation import ApproximationSpec, SphereParams, Thumbnail
from .codec import EncodedImage
from .errors import (EncodeError, MissingPart, ParseError, UnsupportedFormat,
                     VersionMismatch)
from .geometry import DepthMap, Grid
from .transforms import IDENTITY

SIDECAR_VERSION = 1


# ---------------------------------------------------------------------------
# depth-map ingestion


def _mask_nonfinite(values: np.ndarray) -> DepthMap:
    valid = np.isfinite(values)
    values = np.where(valid, values, 0.0)
    return DepthMap(values.astype(np.float32), valid, Grid(0.0, 0.0, 1.0, 1.0))


def _read_pfm(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    try:
        header_end = 0
        lines = []
        for _ in range(3):
            nl = data.index(b"\n", header_end)
            lines.append(data[header_end:nl])
            header_end = nl + 1
    except ValueError:
        raise ParseError("incomplete PFM header", offset=len(data))
    tag = lines[0].strip()
    if tag == b"PF":
        raise UnsupportedFormat("3-channel PFM is not supported, expected grayscale 'Pf'")
    if tag != b"Pf":
        raise ParseError(f"not a PFM file (tag {tag!r})", offset=0)
    try:
        width, height = (int(v) for v in lines[1].split())
        scale = float(lines[2])
    except ValueError as exc:
        raise ParseError(f"bad PFM header: {exc}", offset=len(lines[0]) + 1)
    endian = "<" if scale < 0 else ">"
    count = width * height
    payload = data[header_end:]
    if len(payload) < count * 4:
        raise ParseError(
            f"truncated PFM payload: expected {count * 4} bytes, got {len(payload)}",
            offset=header_end + len(payload))
    values = np.frombuffer(payload[: count * 4], dtype=endian + "f4")
    # PFM stores rows bottom-up
    return np.flipud(values.reshape(height, width)).astype(np.float64)


def _read_rawf32(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 12 or data[:4] != b"RZR1":
        raise ParseError("missing RZR1 magic", offset=0)
    width, height = struct.unpack("<II", data[4:12])
    count = width * height
    if len(data) < 12 + count * 4:
        raise ParseError(
            f"truncated payload: expected {count * 4} bytes, got {len(data) - 12}",
            offset=len(data))
    values = np.frombuffer(data[12: 12 + count * 4], dtype="<f4")
    return values.reshape(height, width).astype(np.float64)


def _read_csv(path: str) -> np.ndarray:
    try:
        values = np.genfromtxt(path, delimiter=",", dtype=np.float64)
    except Exception as exc:
        raise ParseError(f"bad CSV depth file: {exc}")
    if values.ndim == 1:
        values = values.reshape(1, -1)
    if values.ndim != 2 or values.size == 0:
        raise ParseError("CSV depth file is empty or ragged")
    return values


_READERS = {"PFM": _read_pfm, "RAWF32": _read_rawf32, "CSV": _read_csv}

_EXTENSIONS = {".pfm": "PFM", ".rawf32": "RAWF32", ".raw": "RAWF32",
               ".csv": "CSV"}


def infer_depth_format(path: str) -> str:
    ext = os.path.splitext(path)[1].lower()
    if ext not in _EXTENSIONS:
        raise UnsupportedFormat(f"cannot infer depth format from {path!r}")
    return _EXTENSIONS[ext]


def read_depth(path: str, format: str | None = None,
               unit_scale: float = 1.0) -> DepthMap:
    """Read a depth map, scaling values into millimeters.

    NaN/inf samples become invalid-mask entries.
    """
    fmt = format or infer_depth_format(path)
    if fmt not in _READERS:
        raise UnsupportedFormat(f"unknown depth format {fmt!r}")
    values = _READERS[fmt](path) * unit_scale
    return _mask_nonfinite(values)


def write_depth(z: DepthMap, path: str, format: str | None = None):
    """Write a depth map; invalid pixels are stored as NaN."""
    fmt = format or infer_depth_format(path)
    values = np.where(z.valid, z.values.astype(np.float64), np.nan)
    if fmt == "PFM":
        with open(path, "wb") as f:
            f.write(f"Pf\n{z.width} {z.height}\n-1.0\n".encode())
            f.write(np.flipud(values).astype("<f4").tobytes())
    elif fmt == "RAWF32":
        with open(path, "wb") as f:
            f.write(b"RZR1" + struct.pack("<II", z.width, z.height))
            f.write(values.astype("<f4").tobytes())
    elif fmt == "CSV":
        np.savetxt(path, values, delimiter=",", fmt="%.9g")
    else:
        raise UnsupportedFormat(f"unknown depth format {fmt!r}")


# ---------------------------------------------------------------------------
# sidecar


@dataclass
class Sidecar:
    """Everything the decoder needs, as written to the .meta file."""

    method: str
    n: float
    p_mm: float
    zr_min_mm: float
    zr_range_mm: float
    image_format: str  # "PNG" | "JPEG"
    image_file: str
    approx_kind: str
    version: int = SIDECAR_VERSION
    jpeg_quality: int | None = None
    stair_levels: int | None = None
    # thumbnail payload metadata (samples live in thumb_file)
    thumb_file: str | None = None
    block_w: int | None = None
    block_h: int | None = None
    target_w: int | None = None
    target_h: int | None = None
    thumb_z_min: float | None = None
    thumb_z_range: float | None = None
    # sphere payload
    sphere_cx: float | None = None
    sphere_cy: float | None = None
    sphere_cz: float | None = None
    sphere_radius: float | None = None
    transform: tuple = tuple(IDENTITY.reshape(16))
    # world grid of the source map
    grid_origin_x: float = 0.0
    grid_origin_y: float = 0.0
    grid_pitch_x: float = 1.0
    grid_pitch_y: float = 1.0

    def __post_init__(self):
        if self.image_format not in ("PNG", "JPEG"):
            raise ValueError(f"unknown image format {self.image_format!r}")
        if self.approx_kind not in ("identity", "thumbnail", "sphere"):
            raise ValueError(f"unknown approximation kind {self.approx_kind!r}")
        if abs(self.p_mm - self.zr_range_mm / self.n) > 1e-9 * abs(self.p_mm):
            raise ValueError("p_mm inconsistent with zr_range_mm / n")
        self.transform = tuple(float(v) for v in self.transform)
        if len(self.transform) != 16:
            raise ValueError("transform must have 16 entries")

    def grid(self) -> Grid:
        return Grid(self.grid_origin_x, self.grid_origin_y,
                    self.grid_pitch_x, self.grid_pitch_y)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


# fixed key order keeps serialization canonical
_SIDECAR_KEYS = [
    "version", "method", "n", "p_mm", "zr_min_mm", "zr_range_mm",
    "image_format", "jpeg_quality", "image_file", "stair_levels",
    "approx_kind", "transform",
    "thumb_file", "block_w", "block_h", "target_w", "target_h",
    "thumb_z_min", "thumb_z_range",
    "sphere_cx", "sphere_cy", "sphere_cz", "sphere_radius",
    "grid_origin_x", "grid_origin_y", "grid_pitch_x", "grid_pitch_y",
]

_INT_KEYS = {"version", "jpeg_quality", "stair_levels", "block_w", "block_h",
             "target_w", "target_h"}
_FLOAT_KEYS = {"n", "p_mm", "zr_min_mm", "zr_range_mm", "thumb_z_min",
               "thumb_z_range", "sphere_cx", "sphere_cy", "sphere_cz",
               "sphere_radius", "grid_origin_x", "grid_origin_y",
               "grid_pitch_x", "grid_pitch_y"}


def serialize_sidecar(sc: Sidecar) -> str:
    lines = []
    for key in _SIDECAR_KEYS:
        value = getattr(sc, key)
        if value is None:
            continue
        if key == "transform":
            lines.append("transform=" + " ".join(repr(v) for v in value))
        else:
            lines.append(f"{key}={_fmt(value)}")
    return "\n".join(lines) + "\n"


def deserialize_sidecar(text: str) -> Sidecar:
    fields_in: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"sidecar line {lineno} is not key=value: {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SIDECAR_KEYS:
            raise ParseError(f"unknown sidecar key {key!r} on line {lineno}")
        try:
            if key == "transform":
                fields_in[key] = tuple(float(v) for v in value.split())
            elif key in _INT_KEYS:
                fields_in[key] = int(value)
            elif key in _FLOAT_KEYS:
                fields_in[key] = float(value)
            else:
                fields_in[key] = value
        except ValueError as exc:
            raise ParseError(f"bad sidecar value on line {lineno}: {exc}")
    version = fields_in.pop("version", None)
    if version != SIDECAR_VERSION:
        raise VersionMismatch(
            f"sidecar version {version} not supported (expected {SIDECAR_VERSION})")
    try:
        return Sidecar(**fields_in)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"inconsistent sidecar: {exc}")


def sidecar_approx_spec(sc: Sidecar, thumbnail: Thumbnail | None) -> ApproximationSpec:
    """Reconstruct the approximation spec a sidecar (+ thumbnail payload) describes."""
    transform = np.asarray(sc.transform, dtype=np.float64).reshape(4, 4)
    if sc.approx_kind == "identity":
        return ApproximationSpec(kind="identity", transform=transform)
    if sc.approx_kind == "thumbnail":
        if thumbnail is None:
            raise MissingPart("sidecar declares a thumbnail but none was provided")
        return ApproximationSpec(kind="thumbnail", thumbnail=thumbnail,
                                 transform=transform)
    sphere = SphereParams(cx=sc.sphere_cx, cy=sc.sphere_cy, cz=sc.sphere_cz,
                          radius=sc.sphere_radius)
    return ApproximationSpec(kind="sphere", sphere=sphere, transform=transform)


# ---------------------------------------------------------------------------
# container


def _image_paths(stem: str, image_format: str) -> tuple[str, str, str]:
    ext = ".png" if image_format == "PNG" else ".jpg"
    return stem + ext, stem + ".meta", stem + ".thumb.png"


def container_stem(path: str) -> str:
    """Accept either a stem or any of the container part paths."""
    for suffix in (".meta", ".thumb.png", ".png", ".jpg"):
        if path.endswith(suffix):
            return path[: -len(suffix)]
    return path


def write_thumbnail_png(thumbnail: Thumbnail, path_or_buf) -> int:
    """Store thumbnail samples as a 16-bit grayscale PNG; returns byte size."""
    img = Image.fromarray(thumbnail.samples)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    data = buf.getvalue()
    if isinstance(path_or_buf, str):
        with open(path_or_buf, "wb") as f:
            f.write(data)
    else:
        path_or_buf.write(data)
    return len(data)


def thumbnail_png_bytes(thumbnail: Thumbnail) -> int:
    buf = io.BytesIO()
    return write_thumbnail_png(thumbnail, buf)


def write_container(img: EncodedImage, sc: Sidecar, out_stem: str,
                    thumbnail: Thumbnail | None = None) -> int:
    """Write all container parts; returns total on-disk bytes."""
    if sc.approx_kind == "thumbnail" and thumbnail is None:
        raise MissingPart("thumbnail spec requires a thumbnail payload")
    image_path, meta_path, thumb_path = _image_paths(out_stem, sc.image_format)
    pil = Image.fromarray(img.to_array(), mode="RGB")
    try:
        if sc.image_format == "PNG":
            pil.save(image_path, format="PNG")
        else:
            quality = sc.jpeg_quality if sc.jpeg_quality is not None else 75
            # chroma subsampling hurts the sin/cos channels; keep 4:4:4 at
            # high quality, baseline 4:2:0 otherwise
            subsampling = 0 if quality >= 95 else 2
            pil.save(image_path, format="JPEG", quality=quality,
                     subsampling=subsampling)
    except OSError as exc:
        raise EncodeError(f"failed to encode image: {exc}")
    total = os.path.getsize(image_path)
    if thumbnail is not None:
        total += write_thumbnail_png(thumbnail, thumb_path)
    meta = serialize_sidecar(sc)
    with open(meta_path, "w", encoding="utf-8") as f:
        f.write(meta)
    total += os.path.getsize(meta_path)
    return total


def read_container(path: str) -> tuple[EncodedImage, Sidecar, Thumbnail | None]:
    """Read all container parts back; PNG images round-trip bit-exactly."""
    stem = container_stem(path)
    meta_path = stem + ".meta"
    if not os.path.exists(meta_path):
        raise MissingPart(f"missing sidecar {meta_path}")
    with open(meta_path, "r", encoding="utf-8") as f:
        sc = deserialize_sidecar(f.read())
    image_path, _, thumb_path = _image_paths(stem, sc.image_format)
    if not os.path.exists(image_path):
        raise MissingPart(f"missing encoded image {image_path}")
    rgb = np.array(Image.open(image_path).convert("RGB"))
    img = EncodedImage.from_array(rgb)
    thumbnail = None
    if sc.approx_kind == "thumbnail":
        if not os.path.exists(thumb_path):
            raise MissingPart(f"missing thumbnail {thumb_path}")
        samples = np.array(Image.open(thumb_path)).astype(np.uint16)
        thumbnail = Thumbnail(samples=samples, z_min=sc.thumb_z_min,
                              z_range=sc.thumb_z_range,
                              block_w=sc.block_w, block_h=sc.block_h,
                              target_w=sc.target_w, target_h=sc.target_h)
    return img, sc, thumbnail
