"""Error metrics, rate-distortion sweeps, and raw-entropy accounting.

RMS errors follow the outlier-exclusion protocol: pixels whose absolute
reconstruction error exceeds a threshold (default 10 mm) are dropped before
averaging, isolating unwrapping failures from encoding precision.  Reported
file sizes always include approximation overhead (thumbnail bytes).
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .approximation import ApproximationSpec
from .codec import CodecConfig
from .container import thumbnail_png_bytes
from .errors import (EmptyIntersection, NonPositivePrecision,
                     TargetUnreachable)
from .geometry import DepthMap, depth_stats, subtract
from .pipeline import decode_depth, encode_depth, stored_approximation

DEFAULT_OUTLIER_THRESHOLD_MM = 10.0

DEFAULT_SWEEP_PERIODS = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0)


@dataclass(frozen=True)
class ErrorReport:
    rms_mm: float
    outliers_excluded: int
    outlier_threshold_mm: float
    accuracy_pct: float


def rms_error(recovered: DepthMap, reference: DepthMap,
              threshold_mm: float = DEFAULT_OUTLIER_THRESHOLD_MM) -> ErrorReport:
    """RMS over jointly valid pixels with |error| <= threshold."""
    if recovered.values.shape != reference.values.shape:
        from .errors import DimensionMismatch
        raise DimensionMismatch(
            f"shape {recovered.values.shape} != {reference.values.shape}")
    joint = recovered.valid & reference.valid
    diff = np.abs(recovered.values.astype(np.float64)
                  - reference.values.astype(np.float64))
    kept = joint & (diff <= threshold_mm)
    if not kept.any():
        raise EmptyIntersection("no jointly valid pixels below the threshold")
    rms = float(np.sqrt(np.mean(diff[kept] ** 2)))
    ref_range = depth_stats(reference).range
    accuracy = 100.0 * (1.0 - rms / ref_range) if ref_range > 0 else 100.0
    return ErrorReport(rms_mm=rms,
                       outliers_excluded=int(joint.sum() - kept.sum()),
                       outlier_threshold_mm=threshold_mm,
                       accuracy_pct=accuracy)


@dataclass(frozen=True)
class SweepRow:
    method: str
    image_format: str
    jpeg_quality: int | None
    n: float
    variant: str  # "reduced" | "baseline"
    file_size_bytes: int
    rms_mm: float
    accuracy_pct: float


def parse_format(fmt: str) -> tuple[str, int | None]:
    """Parse 'png', 'jpeg:80', ... into (format, quality)."""
    name, _, quality = fmt.partition(":")
    name = name.upper()
    if name == "PNG":
        return "PNG", None
    if name in ("JPEG", "JPG"):
        return "JPEG", int(quality) if quality else 75
    raise ValueError(f"unknown image format {fmt!r}")


def sweep(z: DepthMap, spec: ApproximationSpec, n_values,
          methods=("MWD",), formats=("png",),
          threshold_mm: float = DEFAULT_OUTLIER_THRESHOLD_MM,
          workdir: str | None = None) -> list[SweepRow]:
    """Run the full pipeline grid and measure RMS + on-disk size per cell.

    Every (method, format, n) cell is run twice: once with the given
    approximation spec ("reduced") and once with the identity spec
    ("baseline").  Rows come back in deterministic (method, format, n,
    variant) order.
    """
    n_values = [float(n) for n in n_values]
    if not n_values:
        raise ValueError("n_values must be non-empty")
    if any(n <= 0 for n in n_values):
        raise ValueError("encoding periods must be positive")

    rows: list[SweepRow] = []
    variants = [("baseline", ApproximationSpec.identity()), ("reduced", spec)]
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        for method in methods:
            for fmt in formats:
                image_format, quality = parse_format(fmt)
                for n in sorted(n_values):
                    for variant, vspec in variants:
                        stem = os.path.join(tmp, "case")
                        cfg = CodecConfig(method=method, n=n)
                        result = encode_depth(z, vspec, cfg, stem,
                                              image_format=image_format,
                                              jpeg_quality=quality)
                        recovered = decode_depth(stem)
                        report = rms_error(recovered, z, threshold_mm)
                        rows.append(SweepRow(
                            method=method, image_format=image_format,
                            jpeg_quality=quality, n=n, variant=variant,
                            file_size_bytes=result.total_bytes,
                            rms_mm=report.rms_mm,
                            accuracy_pct=report.accuracy_pct))
    return rows


CSV_HEADER = ("method,image_format,jpeg_quality,n,variant,"
              "file_size_bytes,rms_mm,accuracy_pct")


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        quality = "" if r.jpeg_quality is None else str(r.jpeg_quality)
        lines.append(f"{r.method},{r.image_format},{quality},{r.n!r},"
                     f"{r.variant},{r.file_size_bytes},{r.rms_mm!r},"
                     f"{r.accuracy_pct!r}")
    return "\n".join(lines) + "\n"


def min_periods_for_target(rows, target_rms_mm: float) -> SweepRow:
    """Row with the fewest encoding periods meeting the RMS target.

    Ties on n are broken by smaller file size.
    """
    feasible = [r for r in rows if r.rms_mm <= target_rms_mm]
    if not feasible:
        raise TargetUnreachable(
            f"no sweep row reaches RMS <= {target_rms_mm} mm")
    return min(feasible, key=lambda r: (r.n, r.file_size_bytes))


def bits_per_pixel(range_mm: float, precision_mm: float) -> int:
    """Bits needed to code a depth range at a target precision."""
    if precision_mm <= 0:
        raise NonPositivePrecision("precision must be positive")
    if range_mm < 0:
        raise ValueError("range must be non-negative")
    return max(1, math.ceil(math.log2(range_mm / precision_mm + 1.0)))


@dataclass(frozen=True)
class RawSizeReport:
    original_bits: int
    reduced_bits: int
    original_bytes: int
    reduced_bytes: int  # includes approximation overhead
    overhead_bytes: int
    savings_pct: float


def _approx_overhead_bytes(spec: ApproximationSpec) -> int:
    if spec.kind == "identity":
        return 0
    if spec.kind == "thumbnail":
        return thumbnail_png_bytes(spec.thumbnail)
    # four float32 parameters
    return 16


def raw_size_report(z: DepthMap, spec: ApproximationSpec,
                    precision_mm: float) -> RawSizeReport:
    """Raw (unencoded) storage comparison at a fixed target precision."""
    approx = stored_approximation(spec, z)
    z_r = subtract(z, approx)
    pixels = z.width * z.height
    original_bits = bits_per_pixel(depth_stats(z).range, precision_mm)
    reduced_bits = bits_per_pixel(depth_stats(z_r).range, precision_mm)
    original_bytes = -(-original_bits * pixels // 8)
    overhead = _approx_overhead_bytes(spec)
    reduced_bytes = -(-reduced_bits * pixels // 8) + overhead
    savings = 100.0 * (original_bytes - reduced_bytes) / original_bytes
    return RawSizeReport(original_bits=original_bits, reduced_bits=reduced_bits,
                         original_bytes=original_bytes,
                         reduced_bytes=reduced_bytes,
                         overhead_bytes=overhead, savings_pct=savings)
