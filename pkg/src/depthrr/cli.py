"""Command-line front end.

Exit codes: 0 success, 2 usage/input problems, 3 container problems,
4 analysis problems, 5 unreachable rate-distortion target.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import analysis, codec, errors
from .approximation import (ApproximationSpec, SphereParams,
                            block_mean_thumbnail, fit_sphere)
from .container import infer_depth_format, read_depth, write_depth
from .geometry import DepthMap, depth_stats, make_hemisphere
from .pipeline import decode_depth, encode_depth
from .transforms import IDENTITY

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONTAINER = 3
EXIT_ANALYSIS = 4
EXIT_TARGET = 5

_USAGE_ERRORS = (errors.ParseError, errors.UnsupportedFormat,
                 errors.EmptyMask, errors.NonPositivePeriods,
                 errors.NonPositiveRange, errors.NonPositivePrecision,
                 errors.ZeroRange, errors.ZeroScale, errors.DegenerateInput,
                 FileNotFoundError, ValueError)
_CONTAINER_ERRORS = (errors.MissingPart, errors.VersionMismatch,
                     errors.EncodeError)
_ANALYSIS_ERRORS = (errors.DimensionMismatch, errors.EmptyIntersection,
                    errors.MaskCoverage)


def _add_input_args(p: argparse.ArgumentParser):
    p.add_argument("input", help="depth map file (.pfm, .rawf32, .csv)")
    p.add_argument("--input-format", choices=["PFM", "RAWF32", "CSV"],
                   default=None, help="override format inference by extension")
    p.add_argument("--unit-scale", type=float, default=1.0,
                   help="multiply input values by this factor to get mm "
                        "(e.g. 1000 for meters)")


def _add_approx_args(p: argparse.ArgumentParser):
    p.add_argument("--approx", choices=["identity", "thumbnail", "sphere"],
                   default="identity")
    p.add_argument("--block", type=int, nargs=2, default=[8, 8],
                   metavar=("W", "H"), help="thumbnail block size in pixels")
    p.add_argument("--sphere", type=float, nargs=4, default=None,
                   metavar=("CX", "CY", "CZ", "R"),
                   help="explicit sphere parameters in mm")
    p.add_argument("--fit-sphere", action="store_true",
                   help="fit the sphere to the input's valid points")
    p.add_argument("--transform", type=float, nargs=16, default=None,
                   help="row-major 4x4 alignment transform")


def _load_depth(args) -> DepthMap:
    return read_depth(args.input, format=args.input_format,
                      unit_scale=args.unit_scale)


def _build_spec(args, z: DepthMap) -> ApproximationSpec:
    transform = (np.asarray(args.transform).reshape(4, 4)
                 if args.transform is not None else IDENTITY)
    if args.approx == "identity":
        return ApproximationSpec(kind="identity")
    if args.approx == "thumbnail":
        thumb = block_mean_thumbnail(z, args.block[0], args.block[1])
        return ApproximationSpec(kind="thumbnail", thumbnail=thumb,
                                 transform=transform)
    if args.fit_sphere:
        xx, yy = z.world_xy()
        pts = np.stack([xx[z.valid], yy[z.valid],
                        z.values[z.valid].astype(np.float64)], axis=1)
        sphere = fit_sphere(pts)
    elif args.sphere is not None:
        cx, cy, cz, r = args.sphere
        sphere = SphereParams(cx=cx, cy=cy, cz=cz, radius=r)
    else:
        raise ValueError("sphere approximation needs --sphere or --fit-sphere")
    return ApproximationSpec(kind="sphere", sphere=sphere, transform=transform)


def cmd_fixture(args) -> int:
    z = make_hemisphere(args.size, args.radius)
    write_depth(z, args.output)
    print(f"wrote {args.size}x{args.size} hemisphere "
          f"(radius {args.radius} mm) to {args.output}")
    return EXIT_OK


def cmd_encode(args) -> int:
    z = _load_depth(args)
    spec = _build_spec(args, z)
    cfg = codec.CodecConfig(method=args.method, n=args.n,
                            stair_levels=args.stair_levels)
    image_format, quality = analysis.parse_format(args.image_format)
    if args.quality is not None:
        quality = args.quality
    result = encode_depth(z, spec, cfg, args.output,
                          image_format=image_format, jpeg_quality=quality)
    print(f"container: {result.total_bytes} bytes")
    print(f"depth range: {result.original_range_mm:.4g} mm -> "
          f"{result.reduced_range_mm:.4g} mm "
          f"({result.range_reduction_pct:.1f}% reduction)")
    return EXIT_OK


def cmd_decode(args) -> int:
    z = decode_depth(args.container)
    if args.output:
        write_depth(z, args.output)
        print(f"wrote decoded depth to {args.output}")
    if args.reference:
        ref = read_depth(args.reference, unit_scale=args.unit_scale)
        report = analysis.rms_error(z, ref, threshold_mm=args.threshold)
        print(f"rms error: {report.rms_mm:.6g} mm "
              f"({report.accuracy_pct:.2f}% accuracy, "
              f"{report.outliers_excluded} outliers "
              f"> {report.outlier_threshold_mm:g} mm excluded)")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.n:
        raise ValueError("sweep needs a non-empty --n grid")
    z = _load_depth(args)
    spec = _build_spec(args, z)
    rows = analysis.sweep(z, spec, args.n, methods=args.methods,
                          formats=args.formats, threshold_mm=args.threshold)
    csv_text = analysis.rows_to_csv(rows)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    if args.target_rms is not None:
        reduced = analysis.min_periods_for_target(
            [r for r in rows if r.variant == "reduced"], args.target_rms)
        baseline = analysis.min_periods_for_target(
            [r for r in rows if r.variant == "baseline"], args.target_rms)
        saved = 100.0 * (1.0 - reduced.file_size_bytes / baseline.file_size_bytes)
        print(f"target {args.target_rms:g} mm: baseline n={baseline.n:g} "
              f"({baseline.file_size_bytes} bytes) vs reduced n={reduced.n:g} "
              f"({reduced.file_size_bytes} bytes, {saved:.1f}% smaller)")
    return EXIT_OK


def cmd_bits(args) -> int:
    z = _load_depth(args)
    spec = _build_spec(args, z)
    report = analysis.raw_size_report(z, spec, args.precision)
    print(f"original: {report.original_bits} bits/pixel, "
          f"{report.original_bytes} bytes")
    print(f"reduced:  {report.reduced_bits} bits/pixel, "
          f"{report.reduced_bytes} bytes "
          f"(incl. {report.overhead_bytes} overhead bytes)")
    print(f"savings:  {report.savings_pct:.2f}%")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depthrr",
        description="Depth-map compression via range reduction and "
                    "sinusoidal RGB encoding")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixture", help="generate the synthetic hemisphere")
    p.add_argument("output", help="output depth file")
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--radius", type=float, default=256.0)
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("encode", help="encode a depth map into a container")
    _add_input_args(p)
    p.add_argument("output", help="container stem (writes stem.png/.jpg, "
                                  "stem.meta, stem.thumb.png)")
    _add_approx_args(p)
    p.add_argument("--method", choices=["MWD", "DD"], default="MWD")
    p.add_argument("--n", type=float, default=2.0, help="encoding periods")
    p.add_argument("--stair-levels", type=int, default=None)
    p.add_argument("--image-format", default="png",
                   help="png or jpeg (quality via --quality)")
    p.add_argument("--quality", type=int, default=None)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode a container back to depth")
    p.add_argument("container", help="container stem or any part path")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--reference", default=None,
                   help="original depth file for an error report")
    p.add_argument("--unit-scale", type=float, default=1.0)
    p.add_argument("--threshold", type=float,
                   default=analysis.DEFAULT_OUTLIER_THRESHOLD_MM)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("sweep", help="rate-distortion sweep, CSV output")
    _add_input_args(p)
    _add_approx_args(p)
    p.add_argument("--n", type=float, nargs="+",
                   default=list(analysis.DEFAULT_SWEEP_PERIODS))
    p.add_argument("--methods", nargs="+", choices=["MWD", "DD"],
                   default=["MWD"])
    p.add_argument("--formats", nargs="+", default=["png"],
                   help="e.g. png jpeg:100 jpeg:80")
    p.add_argument("--threshold", type=float,
                   default=analysis.DEFAULT_OUTLIER_THRESHOLD_MM)
    p.add_argument("--target-rms", type=float, default=None)
    p.add_argument("-o", "--output", default=None, help="CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bits", help="raw bits-per-pixel comparison")
    _add_input_args(p)
    _add_approx_args(p)
    p.add_argument("--precision", type=float, required=True,
                   help="target precision in mm")
    p.set_defaults(func=cmd_bits)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except errors.TargetUnreachable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TARGET
    except _CONTAINER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTAINER
    except _ANALYSIS_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
